//! Distributional superhedging costs `sup_q E[F_{ξ^q}⁻¹(U) F⁻¹(1 − U)]`.

use std::thread;

use serde_json::{json, Value};

use super::model::{KernelParam, RegimeSwitchModel};
use super::normal;
use super::quadrature::{gauss_legendre_on, golden_section_max};
use crate::error::{Error, Result};

pub const DEFAULT_NODES: usize = 400;
/// Integration range in the normal score `t`, with `u = Φ(t)`.
pub const SCORE_RANGE: f64 = 8.0;
pub const COARSE_GRID: usize = 33;
pub const Q_TOL: f64 = 1e-8;
/// Distance from 0 and 1 at which the coarse grid starts.
pub const Q_EDGE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetDistribution {
    /// The law of `S_T` itself.
    MixtureStock(RegimeSwitchModel),
    Normal {
        mean: f64,
        variance: f64,
    },
    /// `ln X ~ N(m_log, s2)`.
    LogNormal {
        m_log: f64,
        s2: f64,
    },
    PointMass {
        m: f64,
    },
}

impl TargetDistribution {
    /// `F⁻¹(Φ(t))`, exact in `t` for the closed-form families.
    pub fn quantile_at_score(&self, t: f64) -> Result<f64> {
        match self {
            TargetDistribution::MixtureStock(model) => Ok(model.stock_law().log_quantile_at_score(t)?.exp()),
            TargetDistribution::Normal { mean, variance } => Ok(mean + variance.sqrt() * t),
            TargetDistribution::LogNormal { m_log, s2 } => Ok((m_log + s2.sqrt() * t).exp()),
            TargetDistribution::PointMass { m } => Ok(*m),
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        self.quantile_pair(u, 1.0 - u)
    }

    /// `F⁻¹(u)` given both `u` and `1 − u`, each accurate in its own tail.
    pub fn quantile_pair(&self, u: f64, uc: f64) -> Result<f64> {
        match self {
            TargetDistribution::MixtureStock(model) => Ok(model.stock_law().log_quantile_pair(u, uc)?.exp()),
            _ => self.quantile_at_score(normal::inv_cdf_pair(u, uc)),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            TargetDistribution::MixtureStock(model) => model.mean_stock(),
            TargetDistribution::Normal { mean, .. } => *mean,
            TargetDistribution::LogNormal { m_log, s2 } => (m_log + 0.5 * s2).exp(),
            TargetDistribution::PointMass { m } => *m,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            TargetDistribution::MixtureStock(model) => model.variance_stock(),
            TargetDistribution::Normal { variance, .. } => *variance,
            TargetDistribution::LogNormal { m_log, s2 } => (s2.exp() - 1.0) * (2.0 * m_log + s2).exp(),
            TargetDistribution::PointMass { .. } => 0.0,
        }
    }
}

/// Normal and lognormal laws with mean `mean` and variance `variance`.
pub fn targets_for_variance(mean: f64, variance: f64) -> Result<(TargetDistribution, TargetDistribution)> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::InvalidInput(format!("variance must be nonnegative, got {variance}")));
    }
    if !(mean > 0.0) {
        return Err(Error::NonPositiveArgument(mean));
    }
    let s2 = (variance / (mean * mean)).ln_1p();
    Ok((
        TargetDistribution::Normal { mean, variance },
        TargetDistribution::LogNormal { m_log: mean.ln() - 0.5 * s2, s2 },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentTargets {
    pub mean: f64,
    pub variance: f64,
    pub normal: TargetDistribution,
    pub lognormal: TargetDistribution,
}

/// Normal and lognormal targets sharing the mean and variance of `S_T`.
pub fn moment_matched_targets(model: &RegimeSwitchModel) -> Result<MomentTargets> {
    model.validate()?;
    let (mean, variance) = (model.mean_stock(), model.variance_stock());
    let (normal, lognormal) = targets_for_variance(mean, variance)?;
    Ok(MomentTargets { mean, variance, normal, lognormal })
}

/// Quadrature for `g(q) = E[ξ^q F⁻¹(1 − F_{ξ^q}(ξ^q))]`.
///
/// The expectation is split over the two lognormal components of the kernel
/// and each is integrated in its own normal score `z ∈ [−8, 8]`; unlike the
/// level substitution `u = Φ(t)`, the integrand then stays smooth when the
/// components separate and the kernel quantile develops a near-step.
pub struct CostIntegrator {
    target: TargetDistribution,
    scores: Vec<f64>,
    /// Gauss–Legendre weight times the normal density at each score.
    weights: Vec<f64>,
}

impl CostIntegrator {
    pub fn new(target: &TargetDistribution, nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidInput("quadrature needs at least one node".into()));
        }
        let (scores, w) = gauss_legendre_on(nodes, -SCORE_RANGE, SCORE_RANGE);
        let weights = scores.iter().zip(&w).map(|(z, w)| w * normal::pdf(*z)).collect();
        Ok(CostIntegrator { target: *target, scores, weights })
    }

    pub fn g(&self, model: &RegimeSwitchModel, q: f64) -> Result<f64> {
        let law = model.kernel_law(q)?;
        let mut sum = 0.0;
        for (w, (m, s)) in [(law.p, law.high), (1.0 - law.p, law.low)] {
            // E[e^{m+sZ} V(m+sZ)] = e^{m+s²/2} E[V(m+s(Z+s))]: the exponential
            // tilt moves into the score, so no weight outruns the window
            let mut part = 0.0;
            for (z, wz) in self.scores.iter().zip(&self.weights) {
                let y = m + s * (z + s);
                let (cdf, sf) = law.log_cdf_pair(y);
                let v = self.target.quantile_pair(sf, cdf)?;
                if !v.is_finite() {
                    return Err(Error::IntegrationDivergence(format!(
                        "target quantile not finite at kernel value {}",
                        y.exp()
                    )));
                }
                part += wz * v;
            }
            sum += w * (m + 0.5 * s * s).exp() * part;
        }
        Ok(sum)
    }
}

/// `g(q)` with the default 400-node rule.
pub fn maximin_value_g(model: &RegimeSwitchModel, q: f64, target: &TargetDistribution) -> Result<f64> {
    CostIntegrator::new(target, DEFAULT_NODES)?.g(model, q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionCost {
    pub value: f64,
    pub q_star: KernelParam,
    /// The maximizer sits within `1e-6` of an end of `(0, 1)`.
    pub near_endpoint: bool,
}

impl DistributionCost {
    pub fn to_json(&self) -> Value {
        json!({ "value": self.value, "q_star": self.q_star.q, "near_endpoint": self.near_endpoint })
    }
}

/// `sup_q g(q)`: a coarse grid followed by golden-section refinement.
pub fn superhedge_cost_distribution(
    model: &RegimeSwitchModel,
    target: &TargetDistribution,
) -> Result<DistributionCost> {
    superhedge_cost_with(model, &CostIntegrator::new(target, DEFAULT_NODES)?)
}

pub fn superhedge_cost_with(model: &RegimeSwitchModel, integrator: &CostIntegrator) -> Result<DistributionCost> {
    model.validate()?;
    let grid: Vec<f64> =
        (0..COARSE_GRID).map(|i| Q_EDGE + (1.0 - 2.0 * Q_EDGE) * i as f64 / (COARSE_GRID - 1) as f64).collect();
    let values = grid.iter().map(|&q| integrator.g(model, q)).collect::<Result<Vec<_>>>()?;
    let k = (0..grid.len()).fold(0, |b, i| if values[i] > values[b] { i } else { b });
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (mut q, mut value) = golden_section_max(|q| integrator.g(model, q), lo, hi, Q_TOL)?;
    if values[k] > value {
        q = grid[k];
        value = values[k];
    }
    Ok(DistributionCost { value, q_star: KernelParam::new(q)?, near_endpoint: q.min(1.0 - q) <= 2.0 * Q_EDGE })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport {
    /// Superhedging cost of the attainable claim `S_T`.
    pub s0: f64,
    pub cost: DistributionCost,
}

impl GapReport {
    pub fn gap(&self) -> f64 {
        self.s0 - self.cost.value
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s0": self.s0,
            "distributional_cost": self.cost.value,
            "gap": self.gap(),
            "q_star": self.cost.q_star.q,
            "near_endpoint": self.cost.near_endpoint,
        })
    }
}

/// Distributional cost of the law of `S_T` against the price `S0` of `S_T`.
pub fn stochvol_gap(model: &RegimeSwitchModel) -> Result<GapReport> {
    let cost = superhedge_cost_distribution(model, &TargetDistribution::MixtureStock(*model))?;
    Ok(GapReport { s0: model.s0, cost })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub variance: f64,
    pub cost_normal: f64,
    pub cost_lognormal: f64,
}

/// `1e-8` followed by `V·k/10`, `k = 1..19`, with `V` the variance of `S_T`.
pub fn figure2_variance_grid(model: &RegimeSwitchModel) -> Vec<f64> {
    let v = model.variance_stock();
    std::iter::once(1e-8).chain((1..20).map(|k| v * k as f64 / 10.0)).collect()
}

/// Worker count: `EFFICO_THREADS` if set, else the available parallelism.
pub fn worker_threads() -> usize {
    std::env::var("EFFICO_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Costs of the mean-`S0e^{μT}` normal and lognormal targets over a
/// variance grid; rows come back in grid order whatever the thread count.
pub fn figure2_curve(model: &RegimeSwitchModel, grid: &[f64], threads: usize) -> Result<Vec<CurveRow>> {
    model.validate()?;
    if grid.is_empty() || grid.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("variance grid must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("variance grid must be increasing".into()));
    }
    let mean = model.mean_stock();
    let row = |v: f64| -> Result<CurveRow> {
        let (n, l) = targets_for_variance(mean, v)?;
        Ok(CurveRow {
            variance: v,
            cost_normal: superhedge_cost_distribution(model, &n)?.value,
            cost_lognormal: superhedge_cost_distribution(model, &l)?.value,
        })
    };
    let threads = threads.clamp(1, grid.len());
    let chunk = grid.len().div_ceil(threads);
    let parts: Vec<Result<Vec<CurveRow>>> = thread::scope(|s| {
        let handles: Vec<_> =
            grid.chunks(chunk).map(|c| s.spawn(move || c.iter().map(|&v| row(v)).collect())).collect();
        handles.into_iter().map(|h| h.join().expect("curve worker panicked")).collect()
    });
    let mut rows = Vec::with_capacity(grid.len());
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("variance,cost_normal,cost_lognormal\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.variance, r.cost_normal, r.cost_lognormal));
    }
    out
}
