//! Cost-efficient payoffs in incomplete markets: kernel families of finite
//! markets, the four cost-efficiency problems, utility comparisons and a
//! regime-switching volatility case study.

// `!(a > b)` is used deliberately so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distribution;
pub mod efficiency;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod market;
pub mod rational;
pub mod stochvol;
pub mod utility;
pub mod verify;

pub use error::{Error, Result};
