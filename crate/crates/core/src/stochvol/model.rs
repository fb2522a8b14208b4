//! Black–Scholes dynamics whose volatility is `σ_H` with probability `p` and
//! `σ_L` otherwise, independent of the driving Brownian motion; zero rate.

use serde::{Deserialize, Serialize};

use super::mixture::LogNormalMixture;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSwitchModel {
    pub mu: f64,
    #[serde(rename = "sigma_h")]
    pub sigma_high: f64,
    #[serde(rename = "sigma_l")]
    pub sigma_low: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub s0: f64,
}

impl Default for RegimeSwitchModel {
    /// `μ = 0.05`, `σ_H = 0.3`, `σ_L = 0.15`, `p = 1/2`, `T = 1`, `S0 = 1`.
    fn default() -> Self {
        RegimeSwitchModel { mu: 0.05, sigma_high: 0.3, sigma_low: 0.15, p: 0.5, horizon: 1.0, s0: 1.0 }
    }
}

/// Regime reweighting `q` of the kernel family; `boundary` marks the
/// limit kernels `q ∈ {0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParam {
    pub q: f64,
    pub boundary: bool,
}

impl KernelParam {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::ProbabilityOutOfRange(q));
        }
        Ok(KernelParam { q, boundary: q == 0.0 || q == 1.0 })
    }
}

impl RegimeSwitchModel {
    /// Validates the parameters. Equal volatilities and `p = 1` are accepted
    /// as degenerate (complete-market) cases.
    pub fn new(mu: f64, sigma_high: f64, sigma_low: f64, p: f64, horizon: f64, s0: f64) -> Result<Self> {
        let m = RegimeSwitchModel { mu, sigma_high, sigma_low, p, horizon, s0 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.sigma_high, self.sigma_low, self.p, self.horizon, self.s0];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("model parameters must be finite".into()));
        }
        if !(self.sigma_low > 0.0 && self.sigma_high >= self.sigma_low) {
            return Err(Error::InvalidInput(format!(
                "need sigma_h >= sigma_l > 0, got sigma_h = {}, sigma_l = {}",
                self.sigma_high, self.sigma_low
            )));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::ProbabilityOutOfRange(self.p));
        }
        if !(self.mu > 0.0) {
            return Err(Error::InvalidInput(format!("drift must be positive, got {}", self.mu)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::NonPositiveArgument(self.horizon));
        }
        if !(self.s0 > 0.0) {
            return Err(Error::NonPositiveArgument(self.s0));
        }
        Ok(())
    }

    /// Market prices of risk `μ/σ_H`, `μ/σ_L`.
    pub fn theta(&self) -> (f64, f64) {
        (self.mu / self.sigma_high, self.mu / self.sigma_low)
    }

    pub fn stock_law(&self) -> LogNormalMixture {
        let t = self.horizon;
        let comp = |s: f64| (self.s0.ln() + self.mu * t - 0.5 * s * s * t, s * t.sqrt());
        LogNormalMixture { p: self.p, high: comp(self.sigma_high), low: comp(self.sigma_low) }
    }

    /// Law of `ξ^q = (q/p) ℰ(−θ_H W)_T 1{H} + ((1−q)/(1−p)) ℰ(−θ_L W)_T 1{L}`.
    pub fn kernel_law(&self, q: f64) -> Result<LogNormalMixture> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::ProbabilityOutOfRange(q));
        }
        if self.p >= 1.0 {
            return Err(Error::InvalidInput("kernel family needs p < 1".into()));
        }
        let t = self.horizon;
        let (th, tl) = self.theta();
        Ok(LogNormalMixture {
            p: self.p,
            high: ((q / self.p).ln() - 0.5 * th * th * t, th * t.sqrt()),
            low: (((1.0 - q) / (1.0 - self.p)).ln() - 0.5 * tl * tl * t, tl * t.sqrt()),
        })
    }

    pub fn cdf_stock(&self, x: f64) -> Result<f64> {
        self.stock_law().cdf(x)
    }

    pub fn quantile_stock(&self, u: f64) -> Result<f64> {
        self.stock_law().quantile(u)
    }

    pub fn cdf_kernel(&self, q: f64, x: f64) -> Result<f64> {
        self.kernel_law(q)?.cdf(x)
    }

    pub fn quantile_kernel(&self, q: f64, u: f64) -> Result<f64> {
        self.kernel_law(q)?.quantile(u)
    }

    /// `E[S_T] = S0 e^{μT}`.
    pub fn mean_stock(&self) -> f64 {
        self.s0 * (self.mu * self.horizon).exp()
    }

    /// `Var[S_T] = (p e^{σ_H²T} + (1−p) e^{σ_L²T} − 1) S0² e^{2μT}`.
    pub fn variance_stock(&self) -> f64 {
        let t = self.horizon;
        let mix = self.p * (self.sigma_high.powi(2) * t).exp() + (1.0 - self.p) * (self.sigma_low.powi(2) * t).exp();
        (mix - 1.0) * self.mean_stock().powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochvol::normal;

    #[test]
    fn validation() {
        assert!(RegimeSwitchModel::new(0.05, 0.1, 0.2, 0.5, 1.0, 1.0).is_err());
        assert!(RegimeSwitchModel::new(0.05, 0.3, 0.15, 0.0, 1.0, 1.0).is_err());
        assert!(RegimeSwitchModel::new(0.0, 0.3, 0.15, 0.5, 1.0, 1.0).is_err());
        assert!(RegimeSwitchModel::new(0.05, 0.2, 0.2, 1.0, 1.0, 1.0).is_ok());
        assert!(RegimeSwitchModel::default().validate().is_ok());
    }

    #[test]
    fn single_regime_median() {
        let m = RegimeSwitchModel::new(0.05, 0.3, 0.15, 1.0, 1.0, 1.0).unwrap();
        let x = (0.05f64 - 0.045).exp();
        assert!((m.cdf_stock(x).unwrap() - 0.5).abs() < 1e-15);
        assert!(m.kernel_law(0.5).is_err());
    }

    #[test]
    fn equal_volatilities_collapse() {
        let m = RegimeSwitchModel::new(0.05, 0.2, 0.2, 0.4, 2.0, 1.5).unwrap();
        for x in [0.5, 1.0, 1.7, 3.0] {
            let d = ((x / 1.5f64).ln() - 0.1 + 0.04) / (0.2 * 2f64.sqrt());
            assert!((m.cdf_stock(x).unwrap() - normal::cdf(d)).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_has_unit_mean() {
        let m = RegimeSwitchModel::default();
        for q in [0.1, 0.5, 0.9] {
            let law = m.kernel_law(q).unwrap();
            let comp = |(mu, s): (f64, f64)| (mu + 0.5 * s * s).exp();
            assert!((m.p * comp(law.high) + (1.0 - m.p) * comp(law.low) - 1.0).abs() < 1e-14);
        }
    }
}
