//! Expected-utility maximization in the canonical trinomial market.
//!
//! Optimal payoffs are perfectly cost-efficient, hence of the attainable form
//! `(3x0 − 2x*, x0, x*)`, and `x*` solves `u′(x) = 2u′(3x0 − 2x)`.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::distribution::is_convex_dominated_exact;
use crate::efficiency::three_state::{is_attainable_f64, three_state_closed_form, ThreeStateInput};
use crate::efficiency::ProblemKind;
use crate::error::{Error, Result};
use crate::rational::Q;

/// Relative offset keeping FOC brackets inside open domains.
pub const BRACKET_EPS: f64 = 1e-12;
/// Agreement required between the FOC root and an analytic solution.
pub const ANALYTIC_TOL: f64 = 1e-10;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Caller-supplied increasing concave utility with its derivative.
#[derive(Clone)]
pub struct CustomUtility {
    pub u: RealFn,
    pub du: RealFn,
    /// Left end of the open domain (`-∞` for utilities defined on ℝ).
    pub domain_lo: f64,
}

impl fmt::Debug for CustomUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomUtility").field("domain_lo", &self.domain_lo).finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum UtilityKind {
    /// `ln x`
    Log,
    /// `−exp(−x)`
    Exp,
    /// `x^α / α` with `α < 1`, `α ≠ 0`, and `β = α / (α − 1)`.
    Power {
        alpha: f64,
        beta: f64,
    },
    Custom(CustomUtility),
}

impl UtilityKind {
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 || alpha >= 1.0 {
            return Err(Error::InvalidInput(format!("power utility needs alpha < 1 and alpha != 0, got {alpha}")));
        }
        Ok(UtilityKind::Power { alpha, beta: alpha / (alpha - 1.0) })
    }

    pub fn custom(
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain_lo: f64,
    ) -> Self {
        UtilityKind::Custom(CustomUtility { u: Arc::new(u), du: Arc::new(du), domain_lo })
    }

    pub fn name(&self) -> &'static str {
        match self {
            UtilityKind::Log => "log",
            UtilityKind::Exp => "exp",
            UtilityKind::Power { .. } => "power",
            UtilityKind::Custom(_) => "custom",
        }
    }

    pub fn u(&self, x: f64) -> f64 {
        match self {
            UtilityKind::Log => x.ln(),
            UtilityKind::Exp => -(-x).exp(),
            UtilityKind::Power { alpha, .. } => x.powf(*alpha) / alpha,
            UtilityKind::Custom(c) => (c.u)(x),
        }
    }

    pub fn du(&self, x: f64) -> f64 {
        match self {
            UtilityKind::Log => 1.0 / x,
            UtilityKind::Exp => (-x).exp(),
            UtilityKind::Power { alpha, .. } => x.powf(alpha - 1.0),
            UtilityKind::Custom(c) => (c.du)(x),
        }
    }

    fn domain_lo(&self) -> f64 {
        match self {
            UtilityKind::Log | UtilityKind::Power { .. } => 0.0,
            UtilityKind::Exp => f64::NEG_INFINITY,
            UtilityKind::Custom(c) => c.domain_lo,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WealthSolution {
    pub x0: f64,
    pub x_star: f64,
    /// `(3x0 − 2x*, x0, x*)` in state order.
    pub payoff: [f64; 3],
    /// Expected utility under equiprobable states.
    pub value: f64,
    /// Analytic `x*` when a closed form exists.
    pub analytic: Option<f64>,
}

impl WealthSolution {
    fn from_x_star(kind: &UtilityKind, x0: f64, x_star: f64, analytic: Option<f64>) -> Self {
        let payoff = [3.0 * x0 - 2.0 * x_star, x0, x_star];
        let value = payoff.iter().map(|&v| kind.u(v)).sum::<f64>() / 3.0;
        WealthSolution { x0, x_star, payoff, value, analytic }
    }

    /// Size of the risky position, `2(x0 − x*)`.
    pub fn h_hat(&self) -> f64 {
        2.0 * (self.x0 - self.x_star)
    }

    pub fn to_json(&self) -> Value {
        json!({ "x0": self.x0, "x_star": self.x_star, "payoff": self.payoff, "value": self.value, "h_hat": self.h_hat() })
    }
}

/// `u′(x) − 2u′(3x0 − 2x)`, decreasing in `x`.
pub fn foc(kind: &UtilityKind, x0: f64, x: f64) -> f64 {
    kind.du(x) - 2.0 * kind.du(3.0 * x0 - 2.0 * x)
}

fn bracket(kind: &UtilityKind, x0: f64) -> Result<(f64, f64)> {
    let eps = BRACKET_EPS * x0.abs().max(1.0);
    let lo_dom = kind.domain_lo();
    if lo_dom >= x0 {
        return Err(Error::InvalidInput(format!("x0 = {x0} lies outside the utility domain")));
    }
    let hi = x0 - if lo_dom.is_finite() { BRACKET_EPS * (x0 - lo_dom) } else { eps };
    if lo_dom.is_finite() {
        return Ok((lo_dom + BRACKET_EPS * (x0 - lo_dom), hi));
    }
    let mut width = 10.0;
    for _ in 0..60 {
        let lo = x0 - width;
        if foc(kind, x0, lo) > 0.0 {
            return Ok((lo, hi));
        }
        width *= 2.0;
    }
    Ok((x0 - width, hi))
}

/// Root of the first-order condition by bisection, with the analytic
/// solution cross-checked for the closed-form kinds.
pub fn optimal_wealth(kind: &UtilityKind, x0: f64) -> Result<WealthSolution> {
    if !x0.is_finite() {
        return Err(Error::InvalidInput(format!("x0 must be finite, got {x0}")));
    }
    if !matches!(kind, UtilityKind::Custom(_)) && x0 <= 0.0 {
        return Err(Error::NonPositiveArgument(x0));
    }
    let (mut lo, mut hi) = bracket(kind, x0)?;
    let (glo, ghi) = (foc(kind, x0, lo), foc(kind, x0, hi));
    if !(glo > 0.0 && ghi < 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = foc(kind, x0, mid);
        if g == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_star = if foc(kind, x0, lo).abs() <= foc(kind, x0, hi).abs() { lo } else { hi };
    let analytic = analytic_x_star(kind, x0);
    if let Some(a) = analytic {
        if (a - x_star).abs() > ANALYTIC_TOL * x0.abs().max(1.0) {
            return Err(Error::NumericalFailure(format!("FOC root {x_star} disagrees with analytic {a}")));
        }
    }
    Ok(WealthSolution::from_x_star(kind, x0, x_star, analytic))
}

/// `x*` in closed form: `3x0/4`, `x0 − ln 2 / 3`, `3x0·2^{β−1}/(1+2^β)`.
pub fn analytic_x_star(kind: &UtilityKind, x0: f64) -> Option<f64> {
    match kind {
        UtilityKind::Log => Some(0.75 * x0),
        UtilityKind::Exp => Some(x0 - std::f64::consts::LN_2 / 3.0),
        UtilityKind::Power { beta, .. } => Some(3.0 * x0 * 2f64.powf(beta - 1.0) / (1.0 + 2f64.powf(*beta))),
        UtilityKind::Custom(_) => None,
    }
}

/// Duality-based solution for the trinomial tree with returns `ũ = 1`,
/// `0`, `d̃ = −1/2` and `q = −d̃/(ũ − d̃) = 1/3`, written as
/// `(x0 + ĥũ, x0, x0 + ĥd̃)`.
pub fn ds06_closed_form(kind: &UtilityKind, x0: f64) -> Result<WealthSolution> {
    if x0 <= 0.0 || !x0.is_finite() {
        return Err(Error::NonPositiveArgument(x0));
    }
    let (up, down): (f64, f64) = (1.0, -0.5);
    let q = -down / (up - down);
    let h = match kind {
        UtilityKind::Log => x0 * (down + up) / (-2.0 * down * up),
        UtilityKind::Exp => (up / -down).ln() / (up - down),
        UtilityKind::Power { beta, .. } => {
            let c_v = 0.5 * ((2.0 * q).powf(*beta) + (2.0 * (1.0 - q)).powf(*beta));
            x0 / up * ((2.0 * q).powf(beta - 1.0) / c_v - 1.0)
        }
        UtilityKind::Custom(_) => return Err(Error::InvalidInput("no closed form for custom utilities".into())),
    };
    let x_star = x0 + h * down;
    Ok(WealthSolution::from_x_star(kind, x0, x_star, Some(x_star)))
}

/// θ interval searched by [`brute_force_theta`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ThetaRange {
    /// `[−x0/2, x0]`: the payoff `(x0 + 2θ, x0, x0 − θ)` stays nonnegative.
    #[default]
    Nonnegative,
    /// `[−x0, x0/2]`.
    Stated,
}

impl ThetaRange {
    pub fn bounds(self, x0: f64) -> (f64, f64) {
        match self {
            ThetaRange::Nonnegative => (-0.5 * x0, x0),
            ThetaRange::Stated => (-x0, 0.5 * x0),
        }
    }
}

/// Payoff of `θ` shares of the risky asset financed from `x0`.
pub fn theta_payoff(x0: f64, theta: f64) -> [f64; 3] {
    [x0 + 2.0 * theta, x0, x0 - theta]
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaPoint {
    pub theta: f64,
    pub payoff: [f64; 3],
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSearch {
    pub best: ThetaPoint,
    /// Objective at the requested reference position, if any.
    pub reference: Option<ThetaPoint>,
    pub range: (f64, f64),
    pub points: usize,
}

impl ThetaSearch {
    pub fn to_json(&self) -> Value {
        let p = |t: &ThetaPoint| json!({ "theta": t.theta, "payoff": t.payoff, "value": t.value });
        json!({
            "best": p(&self.best),
            "reference": self.reference.as_ref().map(p),
            "range": [self.range.0, self.range.1],
            "points": self.points,
        })
    }
}

/// Exhaustive grid search of `θ ↦ (1/3) Σ U(payoff_i(θ))` with spacing at
/// most `step`.
pub fn brute_force_theta(
    objective: impl Fn(f64) -> f64,
    x0: f64,
    step: f64,
    range: ThetaRange,
    reference: Option<f64>,
) -> Result<ThetaSearch> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {step}")));
    }
    let (lo, hi) = range.bounds(x0);
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::EmptyFeasibleRange { lo, hi });
    }
    let eval = |theta: f64| {
        let payoff = theta_payoff(x0, theta);
        let value = payoff.iter().map(|&v| objective(v)).sum::<f64>() / 3.0;
        ThetaPoint { theta, payoff, value }
    };
    let intervals = (((hi - lo) / step).ceil() as usize).max(1);
    let mut best: Option<ThetaPoint> = None;
    for i in 0..=intervals {
        let p = eval(lo + (hi - lo) * i as f64 / intervals as f64);
        if best.as_ref().is_none_or(|b| p.value > b.value) {
            best = Some(p);
        }
    }
    Ok(ThetaSearch {
        best: best.expect("grid has at least two points"),
        reference: reference.map(eval),
        range: (lo, hi),
        points: intervals + 1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CeCheck {
    pub perfectly_ce: bool,
    /// Optimizer of the convexified minimax problem for the payoff's law.
    pub optimizer: [Q; 3],
    pub value: Q,
    /// The optimizer is dominated by the payoff in convex order.
    pub optimizer_dominated: bool,
}

/// Whether a canonical-market payoff is perfectly cost-efficient, with the
/// cheapest payoff in the convex hull of its law.
pub fn ce_check(payoff: &[Q; 3]) -> Result<CeCheck> {
    let mut s = *payoff;
    s.sort();
    if s[0] == s[2] {
        return Ok(CeCheck { perfectly_ce: true, optimizer: *payoff, value: s[0], optimizer_dominated: true });
    }
    let input = ThreeStateInput::new(s[0], s[1], s[2])?;
    let sol = three_state_closed_form(&input, ProblemKind::ConvexifiedMinimax);
    let crate::efficiency::PayoffSet::Point(z) = &sol.optimizers[0].payoff else {
        unreachable!("the convexified minimax optimizer is unique in the three-state market")
    };
    let optimizer = [z[0], z[1], z[2]];
    Ok(CeCheck {
        perfectly_ce: crate::efficiency::is_perfectly_cost_efficient(&input) && *payoff == optimizer,
        optimizer,
        value: sol.value,
        optimizer_dominated: is_convex_dominated_exact(&optimizer, payoff),
    })
}

/// The optimal payoff of [`optimal_wealth`] is replicable.
pub fn is_solution_attainable(sol: &WealthSolution) -> bool {
    is_attainable_f64(&sol.payoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn log_example() {
        let s = optimal_wealth(&UtilityKind::Log, 1.0).unwrap();
        assert!(close(s.x_star, 0.75, 1e-12));
        assert!(close(s.payoff[0], 1.5, 1e-12));
        assert!(is_solution_attainable(&s));
    }

    #[test]
    fn exp_example() {
        let s = optimal_wealth(&UtilityKind::Exp, 1.0).unwrap();
        assert!(close(s.x_star, 0.768951, 1e-6));
        assert!(foc(&UtilityKind::Exp, 1.0, s.x_star).abs() < 1e-12);
    }

    #[test]
    fn power_example() {
        let k = UtilityKind::power(0.5).unwrap();
        let s = optimal_wealth(&k, 1.0).unwrap();
        assert!(close(s.x_star, 0.5, 1e-12));
        assert!(close(s.payoff[0], 2.0, 1e-12));
        assert!(UtilityKind::power(1.0).is_err() && UtilityKind::power(0.0).is_err());
    }

    #[test]
    fn ds06_agrees() {
        for kind in
            [UtilityKind::Log, UtilityKind::Exp, UtilityKind::power(0.5).unwrap(), UtilityKind::power(-2.0).unwrap()]
        {
            for x0 in [0.3, 1.0, 7.0] {
                let a = optimal_wealth(&kind, x0).unwrap();
                let b = ds06_closed_form(&kind, x0).unwrap();
                for i in 0..3 {
                    assert!(close(a.payoff[i], b.payoff[i], 1e-10), "{kind:?} {x0}");
                }
            }
        }
        let e = ds06_closed_form(&UtilityKind::Exp, 1.0).unwrap();
        assert!(close(e.h_hat(), 2.0 / 3.0 * std::f64::consts::LN_2, 1e-15));
    }

    #[test]
    fn custom_without_sign_change() {
        let k = UtilityKind::custom(|x| x, |_| 1.0, f64::NEG_INFINITY);
        assert!(matches!(optimal_wealth(&k, 1.0), Err(Error::BracketFailure { .. })));
        let k = UtilityKind::custom(f64::ln, |x| 1.0 / x, 0.0);
        assert!(close(optimal_wealth(&k, 2.0).unwrap().x_star, 1.5, 1e-12));
    }

    #[test]
    fn square_reference_point() {
        let sq = |x: f64| if x >= 0.0 { x * x } else { f64::NEG_INFINITY };
        let r = brute_force_theta(sq, 1.0, 1e-3, ThetaRange::Nonnegative, Some(-0.2)).unwrap();
        let p = r.reference.unwrap();
        assert!(close(p.value, 14.0 / 15.0, 1e-12));
        assert!(close(p.payoff[0], 0.6, 1e-15) && close(p.payoff[2], 1.2, 1e-15));
        assert!(r.best.value > p.value);
    }

    #[test]
    fn log_grid_matches_foc() {
        let r = brute_force_theta(f64::ln, 1.0, 1e-4, ThetaRange::Nonnegative, None).unwrap();
        assert!(close(r.best.theta, 0.25, 1e-4));
        let lin = brute_force_theta(|x| x, 1.0, 0.1, ThetaRange::Nonnegative, None).unwrap();
        assert!(close(lin.best.theta, 1.0, 1e-15));
    }

    #[test]
    fn ce_check_examples() {
        let c = ce_check(&[q(3, 5), qi(1), q(6, 5)]).unwrap();
        assert!(!c.perfectly_ce);
        assert_eq!(c.optimizer, [q(6, 5), q(22, 25), q(18, 25)]);
        assert!(c.optimizer_dominated);
        let c = ce_check(&[qi(3), qi(2), qi(1)]).unwrap();
        assert!(!c.perfectly_ce);
        let c = ce_check(&[qi(4), qi(2), qi(1)]).unwrap();
        assert!(c.perfectly_ce);
        assert!(ce_check(&[qi(2), qi(2), qi(2)]).unwrap().perfectly_ce);
    }
}
