//! Optimal values and optimizer sets shared by the closed-form and generic
//! solvers.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::lp::{LinearProgram, LpStatus, Sense};
use crate::rational::{fmt_decimal, fmt_q, to_f64, Q};

/// Arithmetic needed to describe and test optimizer sets, implemented for
/// exact rationals and binary64.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Equality up to the scalar's comparison tolerance.
    fn close(&self, other: &Self) -> bool;
    fn as_f64(&self) -> f64;
    fn from_int(v: i64) -> Self;
    fn to_json(&self, decimal: bool) -> Value;
}

impl Scalar for Q {
    fn close(&self, other: &Self) -> bool {
        self == other
    }
    fn as_f64(&self) -> f64 {
        to_f64(self)
    }
    fn from_int(v: i64) -> Self {
        Q::from_integer(v as i128)
    }
    fn to_json(&self, decimal: bool) -> Value {
        if decimal {
            Value::String(fmt_decimal(to_f64(self)))
        } else {
            Value::String(fmt_q(self))
        }
    }
}

/// Comparison tolerance for solver outputs in floating point.
pub const FLOAT_TOL: f64 = 1e-9;

impl Scalar for f64 {
    fn close(&self, other: &Self) -> bool {
        (self - other).abs() <= FLOAT_TOL * self.abs().max(other.abs()).max(1.0)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn to_json(&self, decimal: bool) -> Value {
        if decimal {
            Value::String(fmt_decimal(*self))
        } else {
            json!(self)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// `sup_ξ inf_{Z ∈ D(F)} E[ξZ]`
    MaximinDF,
    /// `inf_{Z ∈ D(F)} sup_ξ E[ξZ]`
    MinimaxDF,
    /// `inf_{Z ∈ conv(F)} sup_ξ E[ξZ]`
    ConvexifiedMinimax,
    /// `sup_ξ inf_{Z ∈ conv(F)} E[ξZ]`
    ConvexifiedMaximin,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::MaximinDF,
        ProblemKind::ConvexifiedMaximin,
        ProblemKind::ConvexifiedMinimax,
        ProblemKind::MinimaxDF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::MaximinDF => "maximin",
            ProblemKind::MinimaxDF => "minimax",
            ProblemKind::ConvexifiedMinimax => "convexified_minimax",
            ProblemKind::ConvexifiedMaximin => "convexified_maximin",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.replace('-', "_").as_str() {
            "maximin" | "maximin_df" => Some(ProblemKind::MaximinDF),
            "minimax" | "minimax_df" => Some(ProblemKind::MinimaxDF),
            "convexified_minimax" | "cvx_minimax" => Some(ProblemKind::ConvexifiedMinimax),
            "convexified_maximin" | "cvx_maximin" => Some(ProblemKind::ConvexifiedMaximin),
            _ => None,
        }
    }
}

/// Optimal payoffs paired with one kernel description.
#[derive(Clone, Debug, PartialEq)]
pub enum PayoffSet<T> {
    Point(Vec<T>),
    /// `Z(t) = start + t·direction` for `t` in the closed range.
    Segment {
        start: Vec<T>,
        direction: Vec<T>,
        t_range: (T, T),
    },
    /// Convex hull of the listed payoffs.
    Hull(Vec<Vec<T>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelSet<T> {
    /// Parameter `u` of a one-dimensional family.
    Param(T),
    /// Closed parameter range.
    ParamRange(T, T),
    /// Explicit kernel vector.
    Vector(Vec<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer<T> {
    pub payoff: PayoffSet<T>,
    pub kernel: KernelSet<T>,
    /// Some kernel of the pair lies on the boundary of the closed family.
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSet<T> {
    pub kind: ProblemKind,
    pub value: T,
    pub optimizers: Vec<Optimizer<T>>,
}

impl<T: Scalar> PayoffSet<T> {
    /// Payoffs at `samples` evenly spaced positions (all vertices for a hull).
    pub fn sample(&self, samples: usize) -> Vec<Vec<T>> {
        match self {
            PayoffSet::Point(z) => vec![z.clone()],
            PayoffSet::Segment { start, direction, t_range } => spaced(&t_range.0, &t_range.1, samples)
                .into_iter()
                .map(|t| start.iter().zip(direction).map(|(s, d)| s.clone() + t.clone() * d.clone()).collect())
                .collect(),
            PayoffSet::Hull(v) => v.clone(),
        }
    }

    /// Whether `z` belongs to the set (tolerance of the scalar type).
    pub fn contains(&self, z: &[T]) -> bool {
        match self {
            PayoffSet::Point(p) => vec_close(p, z),
            PayoffSet::Segment { start, direction, t_range } => {
                let Some(k) = (0..direction.len()).max_by(|&a, &b| {
                    abs(&direction[a]).partial_cmp(&abs(&direction[b])).unwrap_or(std::cmp::Ordering::Equal)
                }) else {
                    return false;
                };
                if direction[k].is_zero() {
                    return vec_close(start, z);
                }
                let t = (z[k].clone() - start[k].clone()) / direction[k].clone();
                let in_range = (t >= t_range.0 || t.close(&t_range.0)) && (t <= t_range.1 || t.close(&t_range.1));
                let at: Vec<T> = start.iter().zip(direction).map(|(s, d)| s.clone() + t.clone() * d.clone()).collect();
                in_range && vec_close(&at, z)
            }
            PayoffSet::Hull(verts) => in_hull(verts, z),
        }
    }
}

impl<T: Scalar> KernelSet<T> {
    pub fn contains_param(&self, u: &T) -> bool {
        match self {
            KernelSet::Param(p) => p.close(u),
            KernelSet::ParamRange(a, b) => (u >= a || u.close(a)) && (u <= b || u.close(b)),
            KernelSet::Vector(_) => false,
        }
    }

    pub fn contains_vector(&self, xi: &[T]) -> bool {
        matches!(self, KernelSet::Vector(v) if vec_close(v, xi))
    }

    /// Parameters at `samples` evenly spaced positions.
    pub fn sample_params(&self, samples: usize) -> Vec<T> {
        match self {
            KernelSet::Param(u) => vec![u.clone()],
            KernelSet::ParamRange(a, b) => spaced(a, b, samples),
            KernelSet::Vector(_) => Vec::new(),
        }
    }
}

impl<T: Scalar> SolutionSet<T> {
    /// Whether some listed optimizer contains the pair `(z, ξ^u)`.
    pub fn covers(&self, z: &[T], u: &T) -> bool {
        self.optimizers.iter().any(|o| o.kernel.contains_param(u) && o.payoff.contains(z))
    }

    /// Whether some listed optimizer contains the pair `(z, ξ)` for an
    /// explicit kernel vector.
    pub fn covers_kernel(&self, z: &[T], xi: &[T]) -> bool {
        self.optimizers.iter().any(|o| o.kernel.contains_vector(xi) && o.payoff.contains(z))
    }

    pub fn to_json(&self, decimal: bool) -> Value {
        let s = |v: &T| v.to_json(decimal);
        let sv = |v: &[T]| Value::Array(v.iter().map(s).collect());
        let optimizers: Vec<Value> = self
            .optimizers
            .iter()
            .map(|o| {
                let mut obj = serde_json::Map::new();
                match &o.payoff {
                    PayoffSet::Point(z) => {
                        obj.insert("Z".into(), sv(z));
                    }
                    PayoffSet::Segment { start, direction, t_range } => {
                        obj.insert("Z".into(), sv(start));
                        obj.insert("dZ".into(), sv(direction));
                        obj.insert("t_range".into(), json!([s(&t_range.0), s(&t_range.1)]));
                    }
                    PayoffSet::Hull(verts) => {
                        obj.insert("Z_hull".into(), Value::Array(verts.iter().map(|v| sv(v)).collect()));
                    }
                }
                let kernel = match &o.kernel {
                    KernelSet::Param(u) => json!({ "u": s(u) }),
                    KernelSet::ParamRange(a, b) => json!({ "u_range": [s(a), s(b)] }),
                    KernelSet::Vector(v) => json!({ "xi": sv(v) }),
                };
                obj.insert("kernel".into(), kernel);
                obj.insert("boundary".into(), Value::Bool(o.boundary));
                Value::Object(obj)
            })
            .collect();
        json!({
            "problem": self.kind.name(),
            "value": s(&self.value),
            "optimizers": optimizers,
        })
    }
}

fn abs<T: Scalar>(v: &T) -> T {
    if *v < T::zero() {
        -v.clone()
    } else {
        v.clone()
    }
}

pub(crate) fn vec_close<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.close(y))
}

fn spaced<T: Scalar>(a: &T, b: &T, samples: usize) -> Vec<T> {
    if samples <= 1 || a.close(b) {
        return vec![a.clone()];
    }
    let m = T::from_int(samples as i64 - 1);
    (0..samples)
        .map(|i| {
            let w = T::from_int(i as i64) / m.clone();
            a.clone() + w * (b.clone() - a.clone())
        })
        .collect()
}

/// Convex-combination feasibility by linear programming.
fn in_hull<T: Scalar>(verts: &[Vec<T>], z: &[T]) -> bool {
    if verts.is_empty() {
        return false;
    }
    let k = verts.len();
    let n = z.len();
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| verts.iter().map(|v| v[i].as_f64()).collect()).collect();
    let mut rhs: Vec<f64> = z.iter().map(Scalar::as_f64).collect();
    rows.push(vec![1.0; k]);
    rhs.push(1.0);
    let lp = LinearProgram::new(vec![0.0; k]).with_equalities(rows, rhs).with_lower_bounds(vec![0.0; k]);
    matches!(lp.solve(Sense::Min), Ok(sol) if sol.status == LpStatus::Optimal)
}
