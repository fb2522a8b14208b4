//! Regime-switching volatility: mixture laws, kernel quantiles and the
//! distributional superhedging cost of a target law.

pub mod cost;
pub mod mixture;
pub mod model;
pub mod normal;
pub mod quadrature;

pub use cost::{
    figure2_curve, figure2_variance_grid, maximin_value_g, moment_matched_targets, stochvol_gap,
    superhedge_cost_distribution, CostIntegrator, CurveRow, DistributionCost, GapReport, MomentTargets,
    TargetDistribution,
};
pub use model::{KernelParam, RegimeSwitchModel};
