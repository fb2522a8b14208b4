//! Exact closed forms for the canonical three-state market
//! (`S0 = 2`, `S_T = (4, 2, 1)`, kernels `ξ^u = (3u, 3 − 9u, 6u)`, `u ∈ [0, 1/3]`).

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use super::solution::{KernelSet, Optimizer, PayoffSet, ProblemKind, SolutionSet};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, q, qi, Q};

/// Target atoms `x < y < z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThreeStateInput {
    pub x: Q,
    pub y: Q,
    pub z: Q,
}

impl ThreeStateInput {
    pub fn new(x: Q, y: Q, z: Q) -> Result<Self> {
        if !(x < y && y < z) {
            return Err(Error::OrderingViolated { x: fmt_q(&x), y: fmt_q(&y), z: fmt_q(&z) });
        }
        Ok(ThreeStateInput { x, y, z })
    }

    pub fn from_ints(x: i64, y: i64, z: i64) -> Result<Self> {
        Self::new(qi(x as i128), qi(y as i128), qi(z as i128))
    }

    /// `2x − 3y + z`; its sign selects the column of the optimum tables.
    pub fn delta1(&self) -> Q {
        qi(2) * self.x - qi(3) * self.y + self.z
    }

    /// `x − 3y + 2z`; splits the minimax case `delta1 < 0`.
    pub fn delta2(&self) -> Q {
        self.x - qi(3) * self.y + qi(2) * self.z
    }

    pub fn atoms(&self) -> [Q; 3] {
        [self.x, self.y, self.z]
    }

    fn zyx(&self) -> Vec<Q> {
        vec![self.z, self.y, self.x]
    }
}

pub const U_MAX: Q = Q::new_raw(1, 3);

/// `ξ^u = (3u, 3 − 9u, 6u)`.
pub fn canonical_kernel(u: &Q) -> [Q; 3] {
    [qi(3) * u, qi(3) - qi(9) * u, qi(6) * u]
}

/// `E[ξ^u Z]`.
pub fn canonical_price(u: &Q, z: &[Q]) -> Q {
    let k = canonical_kernel(u);
    (k[0] * z[0] + k[1] * z[1] + k[2] * z[2]) / qi(3)
}

/// Whether `ξ^u` has a zero entry (`u = 0` or `u = 1/3`).
pub fn is_boundary_param(u: &Q) -> bool {
    u.is_zero() || *u == U_MAX
}

fn point(z: Vec<Q>, u: Q) -> Optimizer<Q> {
    let boundary = is_boundary_param(&u);
    Optimizer { payoff: PayoffSet::Point(z), kernel: KernelSet::Param(u), boundary }
}

fn ranged(z: Vec<Q>, lo: Q, hi: Q) -> Optimizer<Q> {
    let boundary = is_boundary_param(&lo) || is_boundary_param(&hi);
    Optimizer { payoff: PayoffSet::Point(z), kernel: KernelSet::ParamRange(lo, hi), boundary }
}

fn segment(start: Vec<Q>, direction: Vec<Q>, len: Q, u: Q) -> Optimizer<Q> {
    let boundary = is_boundary_param(&u);
    Optimizer {
        payoff: PayoffSet::Segment { start, direction, t_range: (qi(0), len) },
        kernel: KernelSet::Param(u),
        boundary,
    }
}

/// Optimal value and the full optimizer description of each problem.
pub fn three_state_closed_form(input: &ThreeStateInput, kind: ProblemKind) -> SolutionSet<Q> {
    let ThreeStateInput { x, y, z } = *input;
    let (fifth, quarter) = (q(1, 5), q(1, 4));
    let d1 = input.delta1().cmp(&Q::zero());
    let low = (qi(2) * x + qi(2) * y + z) / qi(5);
    let high = (qi(2) * x + y + z) / qi(4);
    let common = match d1 {
        Ordering::Greater => high,
        Ordering::Equal => y,
        Ordering::Less => low,
    };
    let zyx = input.zyx();
    let along_top = |u| segment(zyx.clone(), vec![qi(-1), qi(1), qi(0)], z - y, u);
    let along_bottom = |u| segment(zyx.clone(), vec![qi(0), qi(-1), qi(1)], y - x, u);

    let (value, optimizers) = match kind {
        ProblemKind::MaximinDF => {
            let opts = match d1 {
                Ordering::Greater => vec![point(zyx.clone(), quarter), point(vec![y, z, x], quarter)],
                Ordering::Equal => vec![
                    point(vec![z, x, y], fifth),
                    point(vec![y, z, x], quarter),
                    ranged(zyx.clone(), fifth, quarter),
                ],
                Ordering::Less => vec![point(vec![z, x, y], fifth), point(zyx.clone(), fifth)],
            };
            (common, opts)
        }
        ProblemKind::ConvexifiedMaximin => {
            let opts = match d1 {
                Ordering::Greater => vec![along_top(quarter)],
                Ordering::Equal => vec![ranged(zyx.clone(), fifth, quarter), along_top(quarter), along_bottom(fifth)],
                Ordering::Less => vec![along_bottom(fifth)],
            };
            (common, opts)
        }
        ProblemKind::ConvexifiedMinimax => {
            let zstar = match d1 {
                Ordering::Greater => vec![(qi(-2) * x + qi(3) * y + qi(3) * z) / qi(4), high, x],
                Ordering::Equal => zyx.clone(),
                Ordering::Less => vec![z, low, (qi(3) * x + qi(3) * y - z) / qi(5)],
            };
            (common, vec![ranged(zstar, qi(0), U_MAX)])
        }
        ProblemKind::MinimaxDF => match d1 {
            Ordering::Greater => ((qi(2) * x + z) / qi(3), vec![point(zyx.clone(), U_MAX)]),
            Ordering::Equal => (y, vec![ranged(zyx.clone(), qi(0), U_MAX)]),
            Ordering::Less => {
                let xyz = vec![x, y, z];
                let opts = match input.delta2().cmp(&Q::zero()) {
                    Ordering::Greater => vec![point(zyx.clone(), qi(0))],
                    Ordering::Equal => vec![ranged(xyz, qi(0), U_MAX), point(zyx.clone(), qi(0))],
                    Ordering::Less => vec![point(xyz, qi(0)), point(zyx.clone(), qi(0))],
                };
                (y, opts)
            }
        },
    };
    SolutionSet { kind, value, optimizers }
}

/// `z = 3y − 2x`: the optimizer of the convexified problem has law `F`.
pub fn is_perfectly_cost_efficient(input: &ThreeStateInput) -> bool {
    input.delta1().is_zero()
}

/// Float variant of [`is_perfectly_cost_efficient`] with tolerance `1e-12`.
pub fn is_perfectly_cost_efficient_f64(x: f64, y: f64, z: f64) -> bool {
    (z - 3.0 * y + 2.0 * x).abs() < 1e-12
}

/// A payoff is replicable in the canonical market iff `x1 − 3x2 + 2x3 = 0`.
pub fn is_attainable(payoff: &[Q; 3]) -> bool {
    (payoff[0] - qi(3) * payoff[1] + qi(2) * payoff[2]).is_zero()
}

/// Float variant of [`is_attainable`] (tolerance `1e-12`, scaled by the
/// payoff magnitude).
pub fn is_attainable_f64(payoff: &[f64; 3]) -> bool {
    let scale = payoff.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    (payoff[0] - 3.0 * payoff[1] + 2.0 * payoff[2]).abs() < 1e-12 * scale
}

/// Attainable permutation of the atoms that is also of the anti-comonotone
/// form `F^{-1}(1 − U_{ξ^u})`, with its kernel-parameter interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttainableCe {
    pub payoff: [Q; 3],
    pub u_range: (Q, Q),
}

/// Attainable payoffs with law `F` that arise as cost-efficient candidates.
///
/// Of the six permutations only `(x, y, z)` and `(z, y, x)` can be
/// attainable. `(x, y, z)` is never anti-comonotone with a kernel of the
/// family; `(z, y, x)` is, for `u ∈ [1/5, 1/4]`, and it is attainable only
/// when `z = 3y − 2x`.
pub fn attainable_ce_payoffs(input: &ThreeStateInput) -> Vec<AttainableCe> {
    let ThreeStateInput { x, y, z } = *input;
    let mut out = Vec::new();
    if is_attainable(&[z, y, x]) {
        out.push(AttainableCe { payoff: [z, y, x], u_range: (q(1, 5), q(1, 4)) });
    }
    out
}

/// Attainable permutations of the atoms regardless of the anti-comonotone
/// requirement.
pub fn attainable_permutations(input: &ThreeStateInput) -> Vec<[Q; 3]> {
    permutations3(&input.atoms()).into_iter().filter(is_attainable).collect()
}

pub(crate) fn permutations3(a: &[Q; 3]) -> Vec<[Q; 3]> {
    vec![
        [a[0], a[1], a[2]],
        [a[0], a[2], a[1]],
        [a[1], a[0], a[2]],
        [a[1], a[2], a[0]],
        [a[2], a[0], a[1]],
        [a[2], a[1], a[0]],
    ]
}

/// Convexified-minimax value by brute force: the LP over `(a, b)` with
/// `Z = (a, b, x+y+z−a−b)` has its optimum at a vertex of the feasible
/// polygon, and the inner maximum over `u` is at `u = 0` or `u = 1/3`.
/// Kept separate from the table formulas so tests can compare the two.
pub fn convexified_minimax_by_vertices(input: &ThreeStateInput) -> (Q, [Q; 3]) {
    let ThreeStateInput { x, y, z } = *input;
    let total = x + y + z;
    let cost = |a: Q, b: Q| {
        let zz = [a, b, total - a - b];
        let c0 = canonical_price(&qi(0), &zz);
        let c1 = canonical_price(&U_MAX, &zz);
        if c0 > c1 {
            c0
        } else {
            c1
        }
    };
    // half-planes bounding the polygon: a ≥ x, a ≤ z, b ≥ x, b ≤ z,
    // a + b ≥ x + y, a + b ≤ y + z, plus the switch line a + 5b = 2(x+y+z)
    let lines: Vec<(Q, Q, Q)> = vec![
        (qi(1), qi(0), x),
        (qi(1), qi(0), z),
        (qi(0), qi(1), x),
        (qi(0), qi(1), z),
        (qi(1), qi(1), x + y),
        (qi(1), qi(1), y + z),
        (qi(1), qi(5), qi(2) * total),
    ];
    let feasible = |a: Q, b: Q| a >= x && a <= z && b >= x && b <= z && a + b >= x + y && a + b <= y + z;
    let mut best: Option<(Q, [Q; 3])> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.is_zero() {
                continue;
            }
            let a = (c1 * b2 - c2 * b1) / det;
            let b = (a1 * c2 - a2 * c1) / det;
            if !feasible(a, b) {
                continue;
            }
            let c = cost(a, b);
            if best.as_ref().is_none_or(|(v, _)| c < *v) {
                best = Some((c, [a, b, total - a - b]));
            }
        }
    }
    best.expect("the polygon conv(F) is nonempty")
}

pub fn abs_q(v: &Q) -> Q {
    v.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(x: i64, y: i64, z: i64) -> ThreeStateInput {
        ThreeStateInput::from_ints(x, y, z).unwrap()
    }

    #[test]
    fn rejects_unordered() {
        assert!(matches!(ThreeStateInput::from_ints(1, 2, 2), Err(Error::OrderingViolated { .. })));
        assert!(ThreeStateInput::from_ints(3, 2, 1).is_err());
    }

    #[test]
    fn kernel_map() {
        assert_eq!(canonical_kernel(&q(1, 5)), [q(3, 5), q(6, 5), q(6, 5)]);
        assert_eq!(canonical_kernel(&qi(0)), [qi(0), qi(3), qi(0)]);
        assert_eq!(canonical_price(&q(1, 4), &[qi(3), qi(2), qi(1)]), q(7, 4));
    }

    #[test]
    fn example_one_two_three() {
        let i = input(1, 2, 3);
        let maximin = three_state_closed_form(&i, ProblemKind::MaximinDF);
        assert_eq!(maximin.value, q(9, 5));
        assert!(maximin.covers(&[qi(3), qi(1), qi(2)], &q(1, 5)));
        assert!(maximin.covers(&[qi(3), qi(2), qi(1)], &q(1, 5)));
        let minimax = three_state_closed_form(&i, ProblemKind::MinimaxDF);
        assert_eq!(minimax.value, qi(2));
        assert_eq!(minimax.optimizers, vec![point(vec![qi(3), qi(2), qi(1)], qi(0))]);
        assert!(minimax.optimizers[0].boundary);
        let cvx = three_state_closed_form(&i, ProblemKind::ConvexifiedMinimax);
        assert_eq!(cvx.value, q(9, 5));
        assert!(cvx.covers(&[qi(3), q(9, 5), q(6, 5)], &q(1, 7)));
    }

    #[test]
    fn example_one_two_five() {
        let i = input(1, 2, 5);
        assert_eq!(three_state_closed_form(&i, ProblemKind::MinimaxDF).value, q(7, 3));
        let m = three_state_closed_form(&i, ProblemKind::MaximinDF);
        assert_eq!(m.value, q(9, 4));
        assert!(m.covers(&[qi(2), qi(5), qi(1)], &q(1, 4)));
        let c = three_state_closed_form(&i, ProblemKind::ConvexifiedMinimax);
        assert!(c.covers(&[q(19, 4), q(9, 4), qi(1)], &qi(0)));
        let cm = three_state_closed_form(&i, ProblemKind::ConvexifiedMaximin);
        assert!(cm.covers(&[qi(4), qi(3), qi(1)], &q(1, 4)));
        assert!(!cm.covers(&[qi(4), qi(3), qi(1)], &q(1, 5)));
    }

    #[test]
    fn perfectly_efficient_case_shares_family() {
        let i = input(1, 2, 4);
        for kind in ProblemKind::ALL {
            let s = three_state_closed_form(&i, kind);
            assert_eq!(s.value, qi(2), "{kind:?}");
            for u in [q(1, 5), q(9, 40), q(1, 4)] {
                assert!(s.covers(&[qi(4), qi(2), qi(1)], &u), "{kind:?} at {u}");
            }
        }
        assert!(is_perfectly_cost_efficient(&i));
        assert!(!is_perfectly_cost_efficient(&input(1, 2, 3)));
        assert!(is_perfectly_cost_efficient_f64(0.3, 1.1, 3.0 * 1.1 - 0.6));
    }

    #[test]
    fn minimax_subcases() {
        // delta1 < 0 with delta2 = 0 and < 0
        let i = ThreeStateInput::new(qi(-4), qi(0), qi(2)).unwrap();
        assert!(i.delta1() < qi(0) && i.delta2().is_zero());
        let s = three_state_closed_form(&i, ProblemKind::MinimaxDF);
        assert!(s.covers(&[qi(-4), qi(0), qi(2)], &q(1, 6)));
        assert!(s.covers(&[qi(2), qi(0), qi(-4)], &qi(0)));
        let i = ThreeStateInput::new(qi(-10), qi(0), qi(1)).unwrap();
        let s = three_state_closed_form(&i, ProblemKind::MinimaxDF);
        assert_eq!(s.optimizers.len(), 2);
        assert!(s.optimizers.iter().all(|o| o.boundary));
    }

    #[test]
    fn attainability() {
        assert!(is_attainable(&[qi(4), qi(2), qi(1)]));
        assert!(!is_attainable(&[qi(3), qi(2), qi(1)]));
        let (x0, xs) = (q(7, 3), q(-5, 2));
        assert!(is_attainable(&[qi(3) * x0 - qi(2) * xs, x0, xs]));
        assert!(is_attainable_f64(&[1.5, 1.0, 0.75]));
    }

    #[test]
    fn attainable_ce_examples() {
        assert_eq!(
            attainable_ce_payoffs(&input(1, 2, 4)),
            vec![AttainableCe { payoff: [qi(4), qi(2), qi(1)], u_range: (q(1, 5), q(1, 4)) }]
        );
        assert!(attainable_ce_payoffs(&input(1, 2, 3)).is_empty());
        assert!(attainable_ce_payoffs(&input(1, 2, 5)).is_empty());
        assert!(attainable_permutations(&input(1, 2, 3)).is_empty());
        // x − 3y + 2z = 0 makes (x, y, z) attainable, but not of CE form
        let i = input(-4, 0, 2);
        assert_eq!(attainable_permutations(&i), vec![[qi(-4), qi(0), qi(2)]]);
        assert!(attainable_ce_payoffs(&i).is_empty());
    }

    #[test]
    fn vertex_brute_force_matches_table() {
        for (x, y, z) in [(1, 2, 3), (1, 2, 4), (1, 2, 5), (-3, 4, 9), (0, 1, 7)] {
            let i = input(x, y, z);
            let (v, zstar) = convexified_minimax_by_vertices(&i);
            let s = three_state_closed_form(&i, ProblemKind::ConvexifiedMinimax);
            assert_eq!(v, s.value);
            assert!(s.optimizers[0].payoff.contains(&zstar));
        }
    }
}
