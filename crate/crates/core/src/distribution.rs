//! Distributions on `n` equiprobable atoms.
//!
//! Provides the step cdf and its left limit, the left-continuous quantile,
//! the distributional transform of a kernel, the anti-comonotone candidate
//! `F^{-1}(1 - U)`, and convex-order tests by majorization.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::Payoff;
use crate::rational::{Real, Q};

/// Tolerance for float comparisons in convex-order tests.
pub const ORDER_TOL: f64 = 1e-12;

/// Slack used when rounding probability levels onto the `k/n` grid.
const LEVEL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    values: Vec<f64>,
}

impl DiscreteDistribution {
    /// Sorts `values` ascending; each atom carries probability `1/n`.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("distribution needs at least one atom".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("distribution values must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(DiscreteDistribution { values })
    }

    /// Values sorted ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// `F(t) = #{v_i ≤ t} / n`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.values.partition_point(|v| *v <= t) as f64 / self.len() as f64
    }

    /// Left limit `F(t-) = #{v_i < t} / n`.
    pub fn left_cdf(&self, t: f64) -> f64 {
        self.values.partition_point(|v| *v < t) as f64 / self.len() as f64
    }

    /// `inf{t : F(t) ≥ p}` for `p ∈ (0, 1]`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0 + LEVEL_TOL) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(self.values[self.level_index(p)])
    }

    /// Index of the atom returned by `quantile(p)`; levels within
    /// `LEVEL_TOL` of a multiple of `1/n` snap onto it.
    fn level_index(&self, p: f64) -> usize {
        let n = self.len() as f64;
        let k = (p * n - LEVEL_TOL * n).ceil().max(1.0) as usize;
        k.min(self.len()) - 1
    }
}

/// Distribution description as read from JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub values: Vec<Real>,
}

impl DistributionSpec {
    pub fn build(&self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::new(self.values.iter().map(|r| r.0).collect())
    }
}

/// How ties in kernel values are resolved by the distributional transform.
#[derive(Clone, Debug, PartialEq)]
pub enum Randomizer {
    /// `(F(ξ) + F(ξ-)) / 2` in every state.
    Midpoint,
    /// Per-state draws `V_i ∈ [0, 1]`: `F(ξ-) + V_i (F(ξ) - F(ξ-))`.
    Draws(Vec<f64>),
}

impl Randomizer {
    /// Independent uniform draws from a caller-owned generator.
    pub fn uniform<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        Randomizer::Draws((0..n).map(|_| rng.gen::<f64>()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformValue {
    pub levels: Vec<f64>,
    /// Whether some state sat on a jump of the kernel cdf, so that the
    /// randomizer mattered.
    pub randomized: bool,
}

/// Distributional transform of the kernel's own empirical (equiprobable) law.
pub fn distributional_transform(kernel_values: &[f64], randomizer: &Randomizer) -> Result<TransformValue> {
    let law = DiscreteDistribution::new(kernel_values.to_vec())?;
    if let Randomizer::Draws(v) = randomizer {
        if v.len() != kernel_values.len() {
            return Err(Error::DimensionMismatch { expected: kernel_values.len(), got: v.len() });
        }
        if v.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::InvalidInput("randomizer draws must lie in [0, 1]".into()));
        }
    }
    let step = 1.0 / law.len() as f64;
    let mut randomized = false;
    let levels = kernel_values
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let (hi, lo) = (law.cdf(xi), law.left_cdf(xi));
            if hi - lo > step * 1.5 {
                randomized = true;
            }
            match randomizer {
                Randomizer::Midpoint => (hi + lo) / 2.0,
                Randomizer::Draws(v) => lo + v[i] * (hi - lo),
            }
        })
        .collect();
    Ok(TransformValue { levels, randomized })
}

/// `F^{-1}(1 - Û)` state by state: the payoff with law `dist` paired
/// anti-comonotonically with the kernel.
pub fn cost_efficient_candidate(
    dist: &DiscreteDistribution,
    kernel_values: &[f64],
    randomizer: &Randomizer,
) -> Result<Payoff> {
    if dist.len() != kernel_values.len() {
        return Err(Error::DimensionMismatch { expected: dist.len(), got: kernel_values.len() });
    }
    let u = distributional_transform(kernel_values, randomizer)?;
    let values = u
        .levels
        .iter()
        .map(|level| {
            // a level of exactly 1 gives p = 0, clamped onto the bottom atom
            let p = (1.0 - level).max(f64::MIN_POSITIVE);
            dist.quantile(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Payoff(values))
}

/// Majorization test on raw value vectors: equal totals and, for each `k`,
/// the sum of the `k` largest entries of `a` at most that of `b`.
pub(crate) fn majorized_by<T, F>(a: &[T], b: &[T], mut le: F, total_eq: impl Fn(&T, &T) -> bool) -> bool
where
    T: Clone + PartialOrd + std::ops::Add<Output = T> + num_traits::Zero,
    F: FnMut(&T, &T) -> bool,
{
    if a.len() != b.len() {
        return false;
    }
    let desc = |v: &[T]| {
        let mut s = v.to_vec();
        s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        s
    };
    let (sa, sb) = (desc(a), desc(b));
    let (mut pa, mut pb) = (T::zero(), T::zero());
    for (x, y) in sa.into_iter().zip(sb) {
        pa = pa + x;
        pb = pb + y;
        if !le(&pa, &pb) {
            return false;
        }
    }
    total_eq(&pa, &pb)
}

/// `A ≼_cx B` for two equiprobable distributions of equal size.
pub fn is_convex_dominated(a: &DiscreteDistribution, b: &DiscreteDistribution) -> bool {
    majorizes_f64(b.values(), a.values())
}

/// Exact variant of [`is_convex_dominated`] on rational atom vectors.
pub fn is_convex_dominated_exact(a: &[Q], b: &[Q]) -> bool {
    majorized_by(a, b, |x, y| x <= y, |x, y| x == y)
}

/// Whether `big` majorizes `small` (float, tolerance scaled by magnitude).
fn majorizes_f64(big: &[f64], small: &[f64]) -> bool {
    let scale = big.iter().chain(small).fold(1.0f64, |m, v| m.max(v.abs())) * big.len().max(1) as f64;
    let tol = ORDER_TOL * scale;
    majorized_by(small, big, |x, y| *x <= *y + tol, |x, y| (x - y).abs() <= tol)
}

/// Whether payoff `z` lies in the convex hull of the permutations of the
/// atoms of `dist`.
pub fn conv_membership(z: &Payoff, dist: &DiscreteDistribution) -> Result<bool> {
    if z.0.len() != dist.len() {
        return Err(Error::DimensionMismatch { expected: dist.len(), got: z.0.len() });
    }
    Ok(majorizes_f64(dist.values(), &z.0))
}

/// Moves the extreme atoms towards each other by `t`, keeping the mean.
pub fn mean_preserving_contraction(dist: &DiscreteDistribution, t: f64) -> Result<DiscreteDistribution> {
    let v = dist.values();
    let max = (v[v.len() - 1] - v[0]) / 2.0;
    if !(0.0..=max).contains(&t) {
        return Err(Error::ContractionOutOfRange { t, max });
    }
    let mut out = v.to_vec();
    let last = out.len() - 1;
    out[0] += t;
    out[last] -= t;
    DiscreteDistribution::new(out)
}
