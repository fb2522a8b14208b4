//! Standard normal distribution helpers.

use libm::erfc;
use statrs::function::erf::erfc_inv;

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `Φ(x)`, accurate in both tails.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `Φ⁻¹(p)` for `p ∈ [0, 1]` (infinite at the endpoints).
pub fn inv_cdf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// `Φ⁻¹` from a level and its complement, using whichever is smaller.
pub fn inv_cdf_pair(u: f64, uc: f64) -> f64 {
    if u <= uc {
        inv_cdf(u)
    } else {
        -inv_cdf(uc)
    }
}

pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}
