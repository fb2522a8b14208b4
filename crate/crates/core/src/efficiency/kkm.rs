//! Fixed-point diagnostics for the canonical three-state market: the payoff
//! map `u ↦ F^{-1}(1 − F̂_{ξ^u}(ξ^u; U))`, its price `e(s, u)` under another
//! kernel `ξ^s`, and the response sets whose intersection locates the
//! maximin kernels.

use std::cmp::Ordering;

use num_traits::Zero;

use super::three_state::{canonical_kernel, canonical_price, permutations3, ThreeStateInput, U_MAX};
use crate::rational::{q, qi, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KkmDiagnostics {
    pub input: ThreeStateInput,
}

pub fn kkm_diagnostics(input: ThreeStateInput) -> KkmDiagnostics {
    KkmDiagnostics { input }
}

impl KkmDiagnostics {
    /// `e(s, u) = E[ξ^s Z^u]` with `Z^u` the randomized anti-comonotone
    /// payoff for `ξ^u`. Interior `u` uses the five-branch formula; the two
    /// boundary kernels average their tie versions.
    pub fn e(&self, s: &Q, u: &Q) -> Q {
        let ThreeStateInput { x, y, z } = self.input;
        let (fifth, quarter) = (q(1, 5), q(1, 4));
        let zero = Q::zero();
        if *u > zero && *u < fifth {
            x + (qi(-3) * x + qi(2) * y + z) * s
        } else if *u == fifth {
            let m = (x + y) / qi(2);
            m + (z - m) * s
        } else if *u > fifth && *u < quarter {
            y + self.input.delta1() * s
        } else if *u == quarter {
            (y + z) / qi(2) + (qi(2) * x - y - z) * s
        } else if *u > quarter && *u < U_MAX {
            z + (qi(2) * x + y - qi(3) * z) * s
        } else {
            e_by_versions(&self.input, s, u)
        }
    }

    /// Response interval `A(ξ^s)` (equal to `B(ξ^s)` here) as a closed
    /// interval `[lo, hi]` of kernel parameters.
    pub fn response_set(&self, s: &Q) -> (Q, Q) {
        let (fifth, quarter) = (q(1, 5), q(1, 4));
        let (a, b) = match self.input.delta1().cmp(&Q::zero()) {
            Ordering::Greater => (quarter, quarter),
            Ordering::Less => (fifth, fifth),
            Ordering::Equal => (fifth, quarter),
        };
        (if *s < a { *s } else { a }, if *s > b { *s } else { b })
    }

    /// `∩_s A(ξ^s)`.
    pub fn intersection(&self) -> (Q, Q) {
        match self.input.delta1().cmp(&Q::zero()) {
            Ordering::Greater => (q(1, 4), q(1, 4)),
            Ordering::Less => (q(1, 5), q(1, 5)),
            Ordering::Equal => (q(1, 5), q(1, 4)),
        }
    }
}

/// All permutations of the atoms that are anti-comonotone with `ξ^u`
/// (one per way of breaking kernel ties).
pub fn anti_comonotone_versions(input: &ThreeStateInput, u: &Q) -> Vec<[Q; 3]> {
    let k = canonical_kernel(u);
    let mut out: Vec<[Q; 3]> = Vec::new();
    for p in permutations3(&input.atoms()) {
        let ok = (0..3).all(|i| (0..3).all(|j| !(k[i] < k[j]) || p[i] >= p[j]));
        if ok && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn e_by_versions(input: &ThreeStateInput, s: &Q, u: &Q) -> Q {
    let versions = anti_comonotone_versions(input, u);
    let n = qi(versions.len() as i128);
    versions.iter().map(|v| canonical_price(s, v)).fold(Q::zero(), |a, b| a + b) / n
}

/// Direct membership test `u ∈ A(ξ^s)`: some version of the payoff
/// optimal for `ξ^u` is no more expensive under `ξ^s` than under `ξ^u`.
pub fn in_response_set_direct(input: &ThreeStateInput, s: &Q, u: &Q) -> bool {
    anti_comonotone_versions(input, u).iter().any(|v| canonical_price(s, v) <= canonical_price(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(x: i64, y: i64, z: i64) -> KkmDiagnostics {
        kkm_diagnostics(ThreeStateInput::from_ints(x, y, z).unwrap())
    }

    fn grid() -> Vec<Q> {
        (0..=120).map(|k| q(k, 360)).collect()
    }

    #[test]
    fn branch_formula_example() {
        assert_eq!(diag(1, 2, 3).e(&q(1, 6), &q(1, 10)), q(5, 3));
    }

    #[test]
    fn branches_match_version_average() {
        for d in [diag(1, 2, 3), diag(1, 2, 4), diag(1, 2, 5), diag(-2, 3, 11)] {
            for s in grid().iter().step_by(7) {
                for u in grid().iter().skip(1).take(119) {
                    assert_eq!(d.e(s, u), e_by_versions(&d.input, s, u), "s={s} u={u}");
                }
            }
        }
    }

    #[test]
    fn versions_at_ties() {
        let d = diag(1, 2, 3);
        assert_eq!(anti_comonotone_versions(&d.input, &q(1, 10)), vec![[qi(3), qi(1), qi(2)]]);
        assert_eq!(anti_comonotone_versions(&d.input, &q(1, 5)).len(), 2);
        assert_eq!(anti_comonotone_versions(&d.input, &q(1, 4)).len(), 2);
        assert_eq!(anti_comonotone_versions(&d.input, &qi(0)).len(), 2);
    }

    #[test]
    fn response_sets_match_direct_definition() {
        for d in [diag(1, 2, 3), diag(1, 2, 4), diag(1, 2, 5), diag(0, 5, 6), diag(-3, 1, 2)] {
            for s in grid() {
                let (lo, hi) = d.response_set(&s);
                for u in grid() {
                    let inside = lo <= u && u <= hi;
                    assert_eq!(inside, in_response_set_direct(&d.input, &s, &u), "{:?} s={s} u={u}", d.input);
                }
            }
        }
    }

    #[test]
    fn intersections() {
        assert_eq!(diag(1, 2, 3).intersection(), (q(1, 5), q(1, 5)));
        assert_eq!(diag(1, 2, 4).intersection(), (q(1, 5), q(1, 4)));
        assert_eq!(diag(1, 2, 5).intersection(), (q(1, 4), q(1, 4)));
        for d in [diag(1, 2, 3), diag(1, 2, 4), diag(1, 2, 5)] {
            let (mut lo, mut hi) = (qi(0), U_MAX);
            for s in grid() {
                let (a, b) = d.response_set(&s);
                lo = lo.max(a);
                hi = hi.min(b);
            }
            assert_eq!((lo, hi), d.intersection());
        }
    }
}
