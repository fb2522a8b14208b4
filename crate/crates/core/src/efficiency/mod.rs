//! Cost-efficiency problems: exact three-state closed forms, fixed-point
//! diagnostics and generic floating-point solvers.

pub mod generic;
pub mod kkm;
pub mod solution;
pub mod three_state;

pub use generic::{convexified_maximin, convexified_minimax, maximin_df, minimax_df, solve, MAX_GENERIC_STATES};
pub use kkm::{kkm_diagnostics, KkmDiagnostics};
pub use solution::{KernelSet, Optimizer, PayoffSet, ProblemKind, Scalar, SolutionSet};
pub use three_state::{
    attainable_ce_payoffs, is_attainable, is_perfectly_cost_efficient, three_state_closed_form, ThreeStateInput,
};
