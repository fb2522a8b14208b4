//! Two-component lognormal mixtures: `ln X ~ N(m_H, s_H²)` with weight `p`,
//! `N(m_L, s_L²)` with weight `1 − p`.

use super::normal;
use crate::error::{Error, Result};

/// Relative tolerance on the mixing level of the quantile root.
pub const ROOT_TOL: f64 = 1e-13;
const MAX_ROOT_ITERATIONS: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogNormalMixture {
    pub p: f64,
    pub high: (f64, f64),
    pub low: (f64, f64),
}

impl LogNormalMixture {
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::NonPositiveArgument(x));
        }
        let y = x.ln();
        let comp = |(m, s): (f64, f64)| normal::cdf((y - m) / s);
        Ok(self.p * comp(self.high) + (1.0 - self.p) * comp(self.low))
    }

    /// `(F(e^y), 1 − F(e^y))`, each summed from its own tail.
    pub fn log_cdf_pair(&self, y: f64) -> (f64, f64) {
        let (dh, dl) = ((y - self.high.0) / self.high.1, (y - self.low.0) / self.low.1);
        let w = (self.p, 1.0 - self.p);
        (w.0 * normal::cdf(dh) + w.1 * normal::cdf(dl), w.0 * normal::cdf(-dh) + w.1 * normal::cdf(-dl))
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        Ok(self.log_quantile(u)?.exp())
    }

    /// `ln F⁻¹(u)`.
    pub fn log_quantile(&self, u: f64) -> Result<f64> {
        self.log_quantile_pair(u, 1.0 - u)
    }

    /// `ln F⁻¹(Φ(t))`, using the exact complementary level `Φ(−t)`.
    pub fn log_quantile_at_score(&self, t: f64) -> Result<f64> {
        self.log_quantile_pair(normal::cdf(t), normal::cdf(-t))
    }

    /// Levels above one half are handled through `−ln X`, whose mixture has
    /// negated means, so the root search always runs at a level `≤ 1/2`
    /// where doubles resolve the component levels.
    pub(crate) fn log_quantile_pair(&self, u: f64, uc: f64) -> Result<f64> {
        if u > 0.5 {
            let reflected =
                LogNormalMixture { p: self.p, high: (-self.high.0, self.high.1), low: (-self.low.0, self.low.1) };
            return Ok(-reflected.lower_log_quantile(uc)?);
        }
        self.lower_log_quantile(u)
    }

    /// `y* = ln F⁻¹(u)` for `u ≤ 1/2`. The high-component level
    /// `α* = F_H(e^{y*})` is the root equating both component quantiles,
    /// `F_H⁻¹(α) = F_L⁻¹((u − αp)/(1 − p))`; the search runs over `y`, where
    /// the bracket between the two component quantiles at level `u` is
    /// finite, and on `ln F(y) = ln u`, which keeps relative accuracy in the
    /// lower tail where `α*` can be far below any absolute tolerance.
    fn lower_log_quantile(&self, u: f64) -> Result<f64> {
        let (p, (mh, sh), (ml, sl)) = (self.p, self.high, self.low);
        if p >= 1.0 {
            return Ok(mh + sh * normal::inv_cdf(u));
        }
        if p <= 0.0 {
            return Ok(ml + sl * normal::inv_cdf(u));
        }
        let z = normal::inv_cdf(u);
        let (yh, yl) = (mh + sh * z, ml + sl * z);
        let (lo, hi) = if yh <= yl { (yh, yl) } else { (yl, yh) };
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::RootBracketFailure(u));
        }
        let ln_u = u.ln();
        let f = |y: f64| (p * normal::cdf((y - mh) / sh) + (1.0 - p) * normal::cdf((y - ml) / sl)).ln() - ln_u;
        // rounding can push the bracket ends marginally across the root
        if f(lo) >= 0.0 {
            return Ok(lo);
        }
        if f(hi) <= 0.0 {
            return Ok(hi);
        }
        let tol = ROOT_TOL * 0.01 * lo.abs().max(hi.abs()).max(1.0);
        bracketed_root(f, lo, hi, tol).ok_or(Error::RootBracketFailure(u))
    }

    /// Level `α*_u` of the high component at the `u`-quantile.
    pub fn alpha_star(&self, u: f64) -> Result<f64> {
        let y = self.log_quantile(u)?;
        Ok(normal::cdf((y - self.high.0) / self.high.1))
    }
}

/// Root of an increasing `f` on `(a, b)` with `f(a+) < 0 < f(b−)` (values at
/// the ends may be infinite). Regula falsi with the Illinois modification;
/// every third step, and any step with an infinite end value, bisects.
pub fn bracketed_root(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (a, b);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo.is_nan() || fhi.is_nan() || flo > 0.0 || fhi < 0.0 {
        return None;
    }
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    let mut side = 0i8;
    for it in 0..MAX_ROOT_ITERATIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let secant = flo.is_finite() && fhi.is_finite() && it % 3 != 2;
        let mut x = if secant { lo - flo * (hi - lo) / (fhi - flo) } else { mid };
        if !(x > lo && x < hi) {
            x = mid;
        }
        let fx = f(x);
        if fx.is_nan() {
            return None;
        }
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Some(0.5 * (lo + hi))
}
