//! The four cost-efficiency problems for an arbitrary finite market, in
//! floating point. Permutation-based steps are limited to
//! [`MAX_GENERIC_STATES`] states.

use super::solution::{KernelSet, Optimizer, PayoffSet, ProblemKind, SolutionSet};
use crate::distribution::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Sense};
use crate::market::{
    dot_mean, kernel_family, superhedge_cost_tol, DiscreteMarket, KernelFamily, KernelMaximizer, Payoff, PricingKernel,
};

pub const MAX_GENERIC_STATES: usize = 7;

/// Relative tolerance for declaring two objective values equal.
const VALUE_TOL: f64 = 1e-9;
/// Relative tolerance for kernel entries to count as tied.
const TIE_TOL: f64 = 1e-10;
/// Coordinate spread above which the convexified minimax optimizer is
/// reported as non-unique.
const UNIQUE_TOL: f64 = 1e-7;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VALUE_TOL * a.abs().max(b.abs()).max(1.0)
}

fn check(market: &DiscreteMarket, dist: &DiscreteDistribution, limit: bool) -> Result<KernelFamily> {
    let n = market.states();
    if dist.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dist.len() });
    }
    if limit && n > MAX_GENERIC_STATES {
        return Err(Error::TooManyStates { n, limit: MAX_GENERIC_STATES });
    }
    kernel_family(market)
}

/// Dispatches on `kind`.
pub fn solve(market: &DiscreteMarket, dist: &DiscreteDistribution, kind: ProblemKind) -> Result<SolutionSet<f64>> {
    match kind {
        ProblemKind::MaximinDF => maximin_df(market, dist),
        ProblemKind::MinimaxDF => minimax_df(market, dist),
        ProblemKind::ConvexifiedMinimax => convexified_minimax(market, dist),
        ProblemKind::ConvexifiedMaximin => convexified_maximin(market, dist),
    }
}

/// `min_{Z ∈ D(F)} E[ξZ]`: kernel ascending against values descending.
pub fn inner_minimum(kernel: &[f64], sorted_values: &[f64]) -> f64 {
    let mut k = kernel.to_vec();
    k.sort_by(f64::total_cmp);
    let n = k.len();
    k.iter().enumerate().map(|(i, ki)| ki * sorted_values[n - 1 - i]).sum::<f64>() / n as f64
}

/// Distinct permutations of a multiset, in lexicographic order.
pub fn distinct_permutations(values: &[f64]) -> Vec<Vec<f64>> {
    let mut cur = values.to_vec();
    cur.sort_by(f64::total_cmp);
    let mut out = vec![cur.clone()];
    loop {
        let n = cur.len();
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot has a larger successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

/// Every payoff with law `dist` that is anti-comonotone with `kernel`, one
/// per way of breaking kernel ties.
pub fn anti_comonotone_payoffs(kernel: &[f64], sorted_values: &[f64]) -> Vec<Vec<f64>> {
    let n = kernel.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| kernel[a].total_cmp(&kernel[b]));
    let scale = kernel.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for p in 1..=n {
        if p == n || kernel[order[p]] - kernel[order[p - 1]] > TIE_TOL * scale {
            groups.push((start, p));
            start = p;
        }
    }
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for (a, b) in groups {
        let block: Vec<f64> = (a..b).map(|p| sorted_values[n - 1 - p]).collect();
        let perms = distinct_permutations(&block);
        let mut next = Vec::with_capacity(out.len() * perms.len());
        for z in &out {
            for perm in &perms {
                let mut z = z.clone();
                for (slot, v) in (a..b).zip(perm) {
                    z[order[slot]] = *v;
                }
                next.push(z);
            }
        }
        out = next;
    }
    out
}

fn kernel_of(family: &KernelFamily, u: f64) -> (KernelSet<f64>, PricingKernel) {
    let seg = family.as_segment().expect("parametric family");
    (KernelSet::Param(u), seg.kernel_at(u))
}

/// Concave inner-minimum profile on the breakpoints of a 1-D family.
struct Profile {
    points: Vec<f64>,
    values: Vec<f64>,
    value: f64,
}

fn profile(family: &KernelFamily, sorted: &[f64]) -> Profile {
    let seg = family.as_segment().expect("parametric family");
    let points = seg.breakpoints();
    let values: Vec<f64> = points.iter().map(|&u| inner_minimum(&seg.kernel_at(u).0, sorted)).collect();
    let value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Profile { points, values, value }
}

/// Optimal kernels of the maximin problem: parameter ranges on which the
/// anti-comonotone payoff is fixed, and isolated tie points.
enum MaximinKernels {
    Range { lo: f64, hi: f64, payoff: Vec<f64> },
    Tie { kernel: KernelSet<f64>, xi: PricingKernel, payoffs: Vec<Vec<f64>>, covered: Vec<Vec<f64>> },
}

fn maximin_kernels(family: &KernelFamily, dist: &DiscreteDistribution) -> Result<(f64, Vec<MaximinKernels>)> {
    let sorted = dist.values();
    match family {
        KernelFamily::Parametric1D(seg) => {
            let p = profile(family, sorted);
            let hit: Vec<bool> = p.values.iter().map(|&v| close(v, p.value)).collect();
            let mut out = Vec::new();
            let mut ranges: Vec<(usize, Vec<f64>)> = Vec::new();
            for i in 0..p.points.len().saturating_sub(1) {
                if hit[i] && hit[i + 1] {
                    let mid = 0.5 * (p.points[i] + p.points[i + 1]);
                    let z = anti_comonotone_payoffs(&seg.kernel_at(mid).0, sorted).remove(0);
                    out.push(MaximinKernels::Range { lo: p.points[i], hi: p.points[i + 1], payoff: z.clone() });
                    ranges.push((i, z));
                }
            }
            for (i, &u) in p.points.iter().enumerate() {
                if !hit[i] {
                    continue;
                }
                let (kernel, xi) = kernel_of(family, u);
                let payoffs = anti_comonotone_payoffs(&xi.0, sorted);
                let covered: Vec<Vec<f64>> =
                    ranges.iter().filter(|(j, _)| *j == i || *j + 1 == i).map(|(_, z)| z.clone()).collect();
                out.push(MaximinKernels::Tie { kernel, xi, payoffs, covered });
            }
            Ok((p.value, out))
        }
        KernelFamily::PolytopeVertices(vertices) => {
            let (value, xi_star) = maximin_assignment_lp(family, sorted)?;
            let mut kernels = vec![xi_star];
            for v in vertices {
                if close(inner_minimum(&v.0, sorted), value)
                    && !kernels.iter().any(|k| k.0.iter().zip(&v.0).all(|(a, b)| (a - b).abs() <= 1e-9))
                {
                    kernels.push(v.clone());
                }
            }
            let out = kernels
                .into_iter()
                .map(|xi| MaximinKernels::Tie {
                    kernel: KernelSet::Vector(xi.0.clone()),
                    payoffs: anti_comonotone_payoffs(&xi.0, sorted),
                    xi,
                    covered: Vec::new(),
                })
                .collect();
            Ok((value, out))
        }
    }
}

/// `max_ξ min_σ E[ξ Z_σ]` through the dual of the inner assignment problem:
/// maximize `Σa + Σb` subject to `a_i + b_j ≤ ξ_i v_j / n` and the pricing
/// constraints on `ξ ≥ 0`.
fn maximin_assignment_lp(family: &KernelFamily, sorted: &[f64]) -> Result<(f64, PricingKernel)> {
    let vertices = family.vertices();
    let n = family.states();
    let m = vertices.len();
    // ξ is written as a convex combination of the vertices: λ ∈ Δ_m.
    let nv = m + 2 * n;
    let mut objective = vec![0.0; nv];
    for c in objective.iter_mut().skip(m) {
        *c = 1.0;
    }
    let mut lp = LinearProgram::new(objective);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0.0; nv];
            for (l, v) in vertices.iter().enumerate() {
                row[l] = -v.0[i] * sorted[j] / n as f64;
            }
            row[m + i] = 1.0;
            row[m + n + j] = 1.0;
            lp.add_inequality(row, 0.0);
        }
    }
    let mut simplex = vec![0.0; nv];
    for c in simplex.iter_mut().take(m) {
        *c = 1.0;
    }
    lp.add_equality(simplex, 1.0);
    for l in 0..m {
        lp.set_bounds(l, Some(0.0), None);
    }
    let sol = lp.solve(Sense::Max)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::NumericalFailure(format!("maximin LP ended with status {:?}", sol.status)));
    }
    let mut xi = vec![0.0; n];
    for (l, v) in vertices.iter().enumerate() {
        for (x, w) in xi.iter_mut().zip(&v.0) {
            *x += sol.x[l] * w;
        }
    }
    Ok((sol.value, PricingKernel(xi)))
}

fn boundary_of(family: &KernelFamily, xi: &PricingKernel) -> bool {
    match family {
        KernelFamily::Parametric1D(seg) => {
            let [a, b] = seg.endpoints();
            let at = |v: &PricingKernel| v.0.iter().zip(&xi.0).all(|(p, q)| (p - q).abs() <= 1e-10);
            (at(&a) && a.is_boundary()) || (at(&b) && b.is_boundary())
        }
        KernelFamily::PolytopeVertices(_) => xi.is_boundary(),
    }
}

/// `sup_ξ min_{Z ∈ D(F)} E[ξZ]` with every optimal pair.
pub fn maximin_df(market: &DiscreteMarket, dist: &DiscreteDistribution) -> Result<SolutionSet<f64>> {
    let family = check(market, dist, true)?;
    let (value, kernels) = maximin_kernels(&family, dist)?;
    let mut optimizers = Vec::new();
    for k in kernels {
        match k {
            MaximinKernels::Range { lo, hi, payoff } => {
                let seg = family.as_segment().expect("parametric family");
                let boundary = boundary_of(&family, &seg.kernel_at(lo)) || boundary_of(&family, &seg.kernel_at(hi));
                optimizers.push(Optimizer {
                    payoff: PayoffSet::Point(payoff),
                    kernel: KernelSet::ParamRange(lo, hi),
                    boundary,
                });
            }
            MaximinKernels::Tie { kernel, xi, payoffs, covered } => {
                let boundary = boundary_of(&family, &xi);
                for z in payoffs.into_iter().filter(|z| !covered.contains(z)) {
                    optimizers.push(Optimizer { payoff: PayoffSet::Point(z), kernel: kernel.clone(), boundary });
                }
            }
        }
    }
    Ok(SolutionSet { kind: ProblemKind::MaximinDF, value, optimizers })
}

/// `sup_ξ min_{Z ∈ conv(F)} E[ξZ]`; same value as [`maximin_df`], with the
/// optimal payoffs at a tie kernel forming the hull of its anti-comonotone
/// versions.
pub fn convexified_maximin(market: &DiscreteMarket, dist: &DiscreteDistribution) -> Result<SolutionSet<f64>> {
    let family = check(market, dist, true)?;
    let (value, kernels) = maximin_kernels(&family, dist)?;
    let mut optimizers = Vec::new();
    for k in kernels {
        match k {
            MaximinKernels::Range { lo, hi, payoff } => {
                let seg = family.as_segment().expect("parametric family");
                let boundary = boundary_of(&family, &seg.kernel_at(lo)) || boundary_of(&family, &seg.kernel_at(hi));
                optimizers.push(Optimizer {
                    payoff: PayoffSet::Point(payoff),
                    kernel: KernelSet::ParamRange(lo, hi),
                    boundary,
                });
            }
            MaximinKernels::Tie { kernel, xi, mut payoffs, covered } => {
                if payoffs.len() == 1 && covered.contains(&payoffs[0]) {
                    continue;
                }
                payoffs.sort_by(|a, b| b.partial_cmp(a).expect("finite payoffs"));
                let payoff = match payoffs.len() {
                    1 => PayoffSet::Point(payoffs.remove(0)),
                    2 => {
                        let (p1, p2) = (&payoffs[0], &payoffs[1]);
                        let len = p1.iter().zip(p2).fold(0.0f64, |m, (a, b)| m.max((b - a).abs()));
                        let direction = p1.iter().zip(p2).map(|(a, b)| (b - a) / len).collect();
                        PayoffSet::Segment { start: p1.clone(), direction, t_range: (0.0, len) }
                    }
                    _ => PayoffSet::Hull(payoffs),
                };
                optimizers.push(Optimizer { payoff, kernel, boundary: boundary_of(&family, &xi) });
            }
        }
    }
    Ok(SolutionSet { kind: ProblemKind::ConvexifiedMaximin, value, optimizers })
}

fn kernel_sets(family: &KernelFamily, maximizers: &[KernelMaximizer]) -> Vec<(KernelSet<f64>, bool)> {
    maximizers
        .iter()
        .map(|m| match m {
            KernelMaximizer::Segment { u_range, boundary } => (KernelSet::ParamRange(u_range.0, u_range.1), *boundary),
            KernelMaximizer::Point { kernel, u: Some(u), boundary } if family.as_segment().is_some() => {
                let _ = kernel;
                (KernelSet::Param(*u), *boundary)
            }
            KernelMaximizer::Point { kernel, boundary, .. } => (KernelSet::Vector(kernel.0.clone()), *boundary),
        })
        .collect()
}

/// `min_{Z ∈ D(F)} sup_ξ E[ξZ]` by enumerating the distinct permutations.
pub fn minimax_df(market: &DiscreteMarket, dist: &DiscreteDistribution) -> Result<SolutionSet<f64>> {
    let family = check(market, dist, true)?;
    let mut costs = Vec::new();
    for z in distinct_permutations(dist.values()) {
        let sh = superhedge_cost_tol(&family, &Payoff(z.clone()), VALUE_TOL)?;
        costs.push((z, sh));
    }
    let value = costs.iter().map(|(_, s)| s.value).fold(f64::INFINITY, f64::min);
    let mut optimizers = Vec::new();
    for (z, sh) in costs.into_iter().filter(|(_, s)| close(s.value, value)) {
        for (kernel, boundary) in kernel_sets(&family, &sh.maximizers) {
            optimizers.push(Optimizer { payoff: PayoffSet::Point(z.clone()), kernel, boundary });
        }
    }
    Ok(SolutionSet { kind: ProblemKind::MinimaxDF, value, optimizers })
}

/// LP for `min t` over `Z ∈ conv(F)` with `E[ξZ] ≤ t` for every extreme
/// kernel. Membership in `conv(F)` is majorization: equal sums, and for each
/// `k` the sum of the `k` largest entries of `Z` bounded by that of `F`,
/// written with auxiliaries `k·τ_k + Σ_i w_{k,i} ≤ s_k`, `Z_i ≤ τ_k + w_{k,i}`.
fn convexified_minimax_lp(family: &KernelFamily, sorted: &[f64]) -> LinearProgram {
    let n = sorted.len();
    let t = n;
    let aux = |k: usize| n + 1 + (k - 1) * (n + 1);
    let nv = n + 1 + (n - 1) * (n + 1);
    let mut objective = vec![0.0; nv];
    objective[t] = 1.0;
    let mut lp = LinearProgram::new(objective);
    for v in family.vertices() {
        let mut row = vec![0.0; nv];
        for (r, w) in row.iter_mut().zip(&v.0) {
            *r = w / n as f64;
        }
        row[t] = -1.0;
        lp.add_inequality(row, 0.0);
    }
    let mut sum = vec![0.0; nv];
    for c in sum.iter_mut().take(n) {
        *c = 1.0;
    }
    lp.add_equality(sum, sorted.iter().sum());
    for k in 1..n {
        let base = aux(k);
        let top: f64 = sorted[n - k..].iter().sum();
        let mut row = vec![0.0; nv];
        row[base] = k as f64;
        for i in 0..n {
            row[base + 1 + i] = 1.0;
            lp.set_bounds(base + 1 + i, Some(0.0), None);
        }
        lp.add_inequality(row, top);
        for i in 0..n {
            let mut row = vec![0.0; nv];
            row[i] = 1.0;
            row[base] = -1.0;
            row[base + 1 + i] = -1.0;
            lp.add_inequality(row, 0.0);
        }
    }
    lp
}

/// `min_{Z ∈ conv(F)} sup_ξ E[ξZ]`. The optimal payoff is reported as a
/// point when unique; otherwise as the hull of the extreme solutions found
/// by minimizing and maximizing each coordinate over the optimal face.
pub fn convexified_minimax(market: &DiscreteMarket, dist: &DiscreteDistribution) -> Result<SolutionSet<f64>> {
    let family = check(market, dist, false)?;
    let sorted = dist.values();
    let n = sorted.len();
    let lp = convexified_minimax_lp(&family, sorted);
    let sol = lp.solve(Sense::Min)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::NumericalFailure(format!("convexified minimax LP ended with status {:?}", sol.status)));
    }
    let value = sol.value;
    let z_star: Vec<f64> = sol.x[..n].to_vec();

    let mut face = lp.clone();
    let mut cap = vec![0.0; lp.vars()];
    cap[n] = 1.0;
    face.add_inequality(cap, value + VALUE_TOL * value.abs().max(1.0));
    let scale = sorted.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut extremes: Vec<Vec<f64>> = vec![z_star.clone()];
    let mut unique = true;
    for i in 0..n {
        let mut lo_hi = [0.0; 2];
        for (slot, sense) in [Sense::Min, Sense::Max].into_iter().enumerate() {
            let mut probe = face.clone();
            probe.objective = vec![0.0; lp.vars()];
            probe.objective[i] = 1.0;
            let s = probe.solve(sense)?;
            if s.status != LpStatus::Optimal {
                return Err(Error::NumericalFailure(format!("optimal-face probe ended with status {:?}", s.status)));
            }
            lo_hi[slot] = s.value;
            let z = s.x[..n].to_vec();
            if !extremes.iter().any(|e| e.iter().zip(&z).all(|(a, b)| (a - b).abs() <= UNIQUE_TOL * scale)) {
                extremes.push(z);
            }
        }
        if lo_hi[1] - lo_hi[0] > UNIQUE_TOL * scale {
            unique = false;
        }
    }
    let sh = superhedge_cost_tol(&family, &Payoff(z_star.clone()), VALUE_TOL)?;
    let payoff = if unique { PayoffSet::Point(z_star) } else { PayoffSet::Hull(extremes) };
    let optimizers = kernel_sets(&family, &sh.maximizers)
        .into_iter()
        .map(|(kernel, boundary)| Optimizer { payoff: payoff.clone(), kernel, boundary })
        .collect();
    Ok(SolutionSet { kind: ProblemKind::ConvexifiedMinimax, value, optimizers })
}

/// Minimax and maximin values agree (within `1e-9`).
pub fn is_perfectly_cost_efficient(market: &DiscreteMarket, dist: &DiscreteDistribution) -> Result<bool> {
    let hi = minimax_df(market, dist)?.value;
    let lo = maximin_df(market, dist)?.value;
    Ok(hi - lo <= VALUE_TOL * hi.abs().max(1.0))
}

/// Re-prices a payoff against a kernel description (parameter or vector).
pub fn pair_price(family: &KernelFamily, kernel: &KernelSet<f64>, z: &[f64]) -> Vec<f64> {
    match kernel {
        KernelSet::Param(u) => vec![dot_mean(&kernel_of(family, *u).1 .0, z)],
        KernelSet::ParamRange(a, b) => {
            let seg = family.as_segment().expect("parametric family");
            (0..5).map(|i| dot_mean(&seg.kernel_at(a + (b - a) * i as f64 / 4.0).0, z)).collect()
        }
        KernelSet::Vector(xi) => vec![dot_mean(xi, z)],
    }
}
