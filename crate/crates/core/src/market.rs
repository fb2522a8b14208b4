//! Discrete equiprobable one-period markets and their pricing kernels.
//!
//! A market has `n` equally likely states, a riskless asset paying 1 in every
//! state (zero interest) and `d` risky assets with initial prices `s0` and
//! terminal prices `s_t[j][i]`. A pricing kernel is a nonnegative state
//! density `xi` with `mean(xi) = 1` that reprices every asset. The closure of
//! the kernel set is a polytope; kernels on its relative boundary may have
//! zero entries and are kept (flagged) rather than dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpStatus, Sense};
use crate::rational::Real;

/// Largest state count for which basic feasible solutions are enumerated.
pub const MAX_ENUMERATION_STATES: usize = 12;

const DEDUP_TOL: f64 = 1e-10;
const NONNEG_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-12;

/// Default tolerance for deciding which kernels attain a superhedging cost.
pub const ATTAIN_TOL: f64 = 1e-12;

/// Entries at or below this are treated as zero when flagging boundary kernels.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMarket {
    s0: Vec<f64>,
    s_t: Vec<Vec<f64>>,
    n: usize,
}

impl DiscreteMarket {
    /// Builds a market from initial prices and the `d × n` matrix of terminal
    /// prices. Fails when the kernel constraint system has no solution.
    pub fn new(s0: Vec<f64>, s_t: Vec<Vec<f64>>) -> Result<Self> {
        if s0.len() != s_t.len() {
            return Err(Error::DimensionMismatch { expected: s0.len(), got: s_t.len() });
        }
        let n = s_t.first().map(Vec::len).unwrap_or(0);
        if s0.is_empty() {
            return Err(Error::InvalidInput("market needs at least one risky asset".into()));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("market needs at least 2 states, got {n}")));
        }
        if let Some(row) = s_t.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: row.len() });
        }
        if s0.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidInput("initial prices must be finite and positive".into()));
        }
        if s_t.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput("terminal prices must be finite and nonnegative".into()));
        }
        let market = DiscreteMarket { s0, s_t, n };
        if !market.is_feasible()? {
            return Err(Error::Infeasible);
        }
        Ok(market)
    }

    /// The three-state market with `S0 = 2`, `S_T = (4, 2, 1)`.
    pub fn canonical() -> Self {
        DiscreteMarket { s0: vec![2.0], s_t: vec![vec![4.0, 2.0, 1.0]], n: 3 }
    }

    pub fn states(&self) -> usize {
        self.n
    }

    pub fn assets(&self) -> usize {
        self.s0.len()
    }

    pub fn initial_prices(&self) -> &[f64] {
        &self.s0
    }

    pub fn terminal_prices(&self) -> &[Vec<f64>] {
        &self.s_t
    }

    /// Equality rows `(coeffs, rhs)` of the kernel constraint system: unit
    /// mean followed by one martingale row per asset.
    pub fn constraint_rows(&self) -> Vec<(Vec<f64>, f64)> {
        let w = 1.0 / self.n as f64;
        let mut rows = vec![(vec![w; self.n], 1.0)];
        for (row, s0) in self.s_t.iter().zip(&self.s0) {
            rows.push((row.iter().map(|v| v * w).collect(), *s0));
        }
        rows
    }

    fn is_feasible(&self) -> Result<bool> {
        let rows = self.constraint_rows();
        let lp = LinearProgram::new(vec![0.0; self.n])
            .with_equalities(rows.iter().map(|r| r.0.clone()).collect(), rows.iter().map(|r| r.1).collect())
            .with_lower_bounds(vec![0.0; self.n]);
        Ok(lp.solve(Sense::Min)?.status == LpStatus::Optimal)
    }

    /// Whether `kernel` satisfies the (closed) kernel constraints to `tol`.
    pub fn admits(&self, kernel: &PricingKernel, tol: f64) -> bool {
        kernel.0.len() == self.n
            && kernel.0.iter().all(|v| *v >= -tol)
            && self.constraint_rows().iter().all(|(c, rhs)| {
                let lhs: f64 = c.iter().zip(&kernel.0).map(|(a, b)| a * b).sum();
                (lhs - rhs).abs() <= tol * rhs.abs().max(1.0)
            })
    }
}

/// Market description as read from JSON. Rationals may be given as `"p/q"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarketSpec {
    pub n: usize,
    pub s0: Vec<Real>,
    #[serde(rename = "sT")]
    pub s_t: Vec<Vec<Real>>,
}

impl MarketSpec {
    pub fn build(&self) -> Result<DiscreteMarket> {
        let market = DiscreteMarket::new(
            self.s0.iter().map(|r| r.0).collect(),
            self.s_t.iter().map(|row| row.iter().map(|r| r.0).collect()).collect(),
        )?;
        if market.states() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: market.states() });
        }
        Ok(market)
    }
}

/// State-price density with respect to the uniform measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingKernel(pub Vec<f64>);

impl PricingKernel {
    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    /// True when some entry vanishes, i.e. the kernel is only a limit of
    /// strictly positive pricing kernels.
    pub fn is_boundary(&self) -> bool {
        self.0.iter().any(|v| *v <= BOUNDARY_TOL)
    }
}

/// Payoff vector, one value per state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Payoff(pub Vec<f64>);

impl Payoff {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("payoff entries must be finite".into()));
        }
        Ok(Payoff(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// One-dimensional kernel family `u ↦ base + u·slope` on `[u_lo, u_hi]`.
///
/// The parameter is the state price of `param_state`, i.e. `u = xi[k] / n`,
/// which for the canonical market gives `u ↦ (3u, 3 − 9u, 6u)` on `[0, 1/3]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSegment {
    pub base: Vec<f64>,
    pub slope: Vec<f64>,
    pub u_lo: f64,
    pub u_hi: f64,
    pub param_state: usize,
}

impl KernelSegment {
    pub fn kernel_at(&self, u: f64) -> PricingKernel {
        PricingKernel(self.base.iter().zip(&self.slope).map(|(b, s)| b + u * s).collect())
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.u_lo - DEDUP_TOL && u <= self.u_hi + DEDUP_TOL
    }

    pub fn endpoints(&self) -> [PricingKernel; 2] {
        [self.kernel_at(self.u_lo), self.kernel_at(self.u_hi)]
    }

    /// Parameters in `[u_lo, u_hi]` where two kernel entries coincide,
    /// together with both endpoints, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let n = self.base.len();
        let mut pts = vec![self.u_lo, self.u_hi];
        for i in 0..n {
            for j in i + 1..n {
                let ds = self.slope[i] - self.slope[j];
                if ds.abs() > RANK_TOL {
                    let u = (self.base[j] - self.base[i]) / ds;
                    if u > self.u_lo && u < self.u_hi {
                        pts.push(u);
                    }
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
        pts
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelFamily {
    /// The closed kernel set is a segment.
    Parametric1D(KernelSegment),
    /// All extreme points of the closed kernel polytope (a single vertex when
    /// the market is complete).
    PolytopeVertices(Vec<PricingKernel>),
}

impl KernelFamily {
    pub fn vertices(&self) -> Vec<PricingKernel> {
        match self {
            KernelFamily::Parametric1D(seg) => seg.endpoints().to_vec(),
            KernelFamily::PolytopeVertices(v) => v.clone(),
        }
    }

    pub fn states(&self) -> usize {
        match self {
            KernelFamily::Parametric1D(seg) => seg.base.len(),
            KernelFamily::PolytopeVertices(v) => v.first().map(|k| k.0.len()).unwrap_or(0),
        }
    }

    pub fn as_segment(&self) -> Option<&KernelSegment> {
        match self {
            KernelFamily::Parametric1D(seg) => Some(seg),
            KernelFamily::PolytopeVertices(_) => None,
        }
    }
}

/// Describes the closed kernel set of `market`.
pub fn kernel_family(market: &DiscreteMarket) -> Result<KernelFamily> {
    let n = market.states();
    if n > MAX_ENUMERATION_STATES {
        return Err(Error::DimensionTooLarge { n, limit: MAX_ENUMERATION_STATES });
    }
    let (rows, consistent) = linalg::independent_rows(&market.constraint_rows(), RANK_TOL);
    if !consistent {
        return Err(Error::Infeasible);
    }
    let vertices = enumerate_vertices(n, &rows);
    if vertices.is_empty() {
        return Err(Error::Infeasible);
    }
    if n - rows.len() == 1 && vertices.len() == 2 {
        return Ok(KernelFamily::Parametric1D(segment_from(&vertices[0], &vertices[1], n)));
    }
    Ok(KernelFamily::PolytopeVertices(vertices))
}

fn segment_from(a: &PricingKernel, b: &PricingKernel, n: usize) -> KernelSegment {
    let nf = n as f64;
    let k = (0..n).find(|&i| (a.0[i] - b.0[i]).abs() > DEDUP_TOL).expect("distinct vertices differ somewhere");
    let (lo, hi) = if a.0[k] < b.0[k] { (a, b) } else { (b, a) };
    let (u_lo, u_hi) = (lo.0[k] / nf, hi.0[k] / nf);
    let slope: Vec<f64> = lo.0.iter().zip(&hi.0).map(|(l, h)| (h - l) / (u_hi - u_lo)).collect();
    let base: Vec<f64> = lo.0.iter().zip(&slope).map(|(l, s)| l - u_lo * s).collect();
    KernelSegment { base, slope, u_lo, u_hi, param_state: k }
}

/// Basic feasible solutions of `{xi ≥ 0, rows}` with duplicates removed.
fn enumerate_vertices(n: usize, rows: &[(Vec<f64>, f64)]) -> Vec<PricingKernel> {
    let r = rows.len();
    let mut out: Vec<PricingKernel> = Vec::new();
    for basis in combinations(n, r) {
        let a: Vec<Vec<f64>> = rows.iter().map(|(c, _)| basis.iter().map(|&j| c[j]).collect()).collect();
        let b: Vec<f64> = rows.iter().map(|(_, rhs)| *rhs).collect();
        let Some(sol) = linalg::solve(a, b, RANK_TOL) else { continue };
        if sol.iter().any(|v| *v < -NONNEG_TOL) {
            continue;
        }
        let mut xi = vec![0.0; n];
        for (&j, v) in basis.iter().zip(sol) {
            xi[j] = v.max(0.0);
        }
        if !out.iter().any(|k| k.0.iter().zip(&xi).all(|(p, q)| (p - q).abs() <= DEDUP_TOL)) {
            out.push(PricingKernel(xi));
        }
    }
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// `E[xi Z] = (1/n) Σ xi_i Z_i`.
pub fn price(kernel: &PricingKernel, payoff: &Payoff) -> Result<f64> {
    if kernel.0.len() != payoff.0.len() {
        return Err(Error::DimensionMismatch { expected: kernel.0.len(), got: payoff.0.len() });
    }
    Ok(dot_mean(&kernel.0, &payoff.0))
}

pub(crate) fn dot_mean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// A kernel (or range of kernels) attaining a superhedging cost.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelMaximizer {
    Point {
        kernel: PricingKernel,
        u: Option<f64>,
        boundary: bool,
    },
    /// Every kernel of the parametric family with `u` in the closed range.
    Segment {
        u_range: (f64, f64),
        boundary: bool,
    },
}

impl KernelMaximizer {
    pub fn is_boundary(&self) -> bool {
        match self {
            KernelMaximizer::Point { boundary, .. } | KernelMaximizer::Segment { boundary, .. } => *boundary,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Superhedge {
    pub value: f64,
    pub maximizers: Vec<KernelMaximizer>,
}

impl Superhedge {
    /// True when some attaining kernel is a boundary (limit) kernel.
    pub fn boundary(&self) -> bool {
        self.maximizers.iter().any(KernelMaximizer::is_boundary)
    }
}

/// Superhedging cost `sup_{xi in closure} E[xi Z]` with all attaining extreme
/// kernels (a whole segment when both endpoints of a 1-D family attain).
pub fn superhedge_cost(family: &KernelFamily, payoff: &Payoff) -> Result<Superhedge> {
    superhedge_cost_tol(family, payoff, ATTAIN_TOL)
}

/// As [`superhedge_cost`] with an explicit attainment tolerance (relative to
/// `max(1, |value|)`).
pub fn superhedge_cost_tol(family: &KernelFamily, payoff: &Payoff, tol: f64) -> Result<Superhedge> {
    let verts = family.vertices();
    if verts.is_empty() {
        return Err(Error::InvalidInput("empty kernel family".into()));
    }
    let prices = verts.iter().map(|k| price(k, payoff)).collect::<Result<Vec<_>>>()?;
    let value = prices.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = tol * value.abs().max(1.0);
    let hits: Vec<usize> = (0..verts.len()).filter(|&i| value - prices[i] <= slack).collect();
    let maximizers = match family {
        KernelFamily::Parametric1D(seg) => {
            if hits.len() == 2 {
                vec![KernelMaximizer::Segment {
                    u_range: (seg.u_lo, seg.u_hi),
                    boundary: verts.iter().any(PricingKernel::is_boundary),
                }]
            } else {
                let i = hits[0];
                vec![KernelMaximizer::Point {
                    kernel: verts[i].clone(),
                    u: Some(if i == 0 { seg.u_lo } else { seg.u_hi }),
                    boundary: verts[i].is_boundary(),
                }]
            }
        }
        KernelFamily::PolytopeVertices(_) => hits
            .into_iter()
            .map(|i| KernelMaximizer::Point { kernel: verts[i].clone(), u: None, boundary: verts[i].is_boundary() })
            .collect(),
    };
    Ok(Superhedge { value, maximizers })
}
