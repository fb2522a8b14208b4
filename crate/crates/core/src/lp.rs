//! Small dense linear-programming solver.
//!
//! Two-phase tableau simplex with Bland's rule. Variables are free unless
//! bounds are given; the problem is rewritten in standard form
//! (`A y = b`, `y ≥ 0`) before solving. Sizes here are a few hundred
//! columns at most, so the tableau is kept dense and reduced costs are
//! recomputed from scratch at every iteration.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Constraint that holds with equality at a returned solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActiveConstraint {
    Inequality(usize),
    Equality(usize),
    Lower(usize),
    Upper(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value (NaN unless optimal).
    pub value: f64,
    /// Primal solution (empty unless optimal).
    pub x: Vec<f64>,
    pub active: Vec<ActiveConstraint>,
}

impl LpSolution {
    fn without(status: LpStatus) -> Self {
        LpSolution { status, value: f64::NAN, x: Vec::new(), active: Vec::new() }
    }
}

/// `optimize c·x` subject to `A x ≤ b`, `E x = f` and optional bounds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub ineq_a: Vec<Vec<f64>>,
    pub ineq_b: Vec<f64>,
    pub eq_a: Vec<Vec<f64>>,
    pub eq_b: Vec<f64>,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { objective, lower: vec![None; n], upper: vec![None; n], ..Default::default() }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn with_inequalities(mut self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        self.ineq_a.extend(a);
        self.ineq_b.extend(b);
        self
    }

    pub fn with_equalities(mut self, a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        self.eq_a.extend(a);
        self.eq_b.extend(b);
        self
    }

    pub fn with_lower_bounds(mut self, lo: Vec<f64>) -> Self {
        self.lower = lo.into_iter().map(Some).collect();
        self
    }

    pub fn add_inequality(&mut self, row: Vec<f64>, rhs: f64) {
        self.ineq_a.push(row);
        self.ineq_b.push(rhs);
    }

    pub fn add_equality(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_a.push(row);
        self.eq_b.push(rhs);
    }

    pub fn set_bounds(&mut self, var: usize, lo: Option<f64>, hi: Option<f64>) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars();
        let dims_ok = self.ineq_a.len() == self.ineq_b.len()
            && self.eq_a.len() == self.eq_b.len()
            && self.lower.len() == n
            && self.upper.len() == n
            && self.ineq_a.iter().chain(&self.eq_a).all(|r| r.len() == n);
        if !dims_ok {
            return Err(Error::InvalidInput("inconsistent linear program dimensions".into()));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.ineq_a.iter().flatten())
            .chain(self.eq_a.iter().flatten())
            .chain(&self.ineq_b)
            .chain(&self.eq_b)
            .chain(self.lower.iter().flatten())
            .chain(self.upper.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite linear program coefficient".into()));
        }
        Ok(())
    }

    pub fn solve(&self, sense: Sense) -> Result<LpSolution> {
        solve_lp(self, sense)
    }
}

/// How an original variable is expressed through standard-form columns.
#[derive(Clone, Copy)]
enum VarMap {
    Shift { col: usize, lo: f64 },
    Mirror { col: usize, hi: f64 },
    Split { pos: usize, neg: usize },
}

pub fn solve_lp(lp: &LinearProgram, sense: Sense) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.vars();
    if lp.lower.iter().zip(&lp.upper).any(|(l, u)| matches!((l, u), (Some(l), Some(u)) if l > u)) {
        return Ok(LpSolution::without(LpStatus::Infeasible));
    }

    // Column layout: structural columns, then one slack per inequality row
    // (including upper-bound rows).
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let m = match (lp.lower[j], lp.upper[j]) {
            (Some(lo), hi) => {
                if let Some(hi) = hi {
                    bound_rows.push((ncols, hi - lo));
                }
                VarMap::Shift { col: ncols, lo }
            }
            (None, Some(hi)) => VarMap::Mirror { col: ncols, hi },
            (None, None) => {
                ncols += 1;
                VarMap::Split { pos: ncols - 1, neg: ncols }
            }
        };
        ncols += 1;
        maps.push(m);
    }
    let n_struct = ncols;

    let transform = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; n_struct];
        let mut r = rhs;
        for (j, a) in row.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    out[col] += a;
                    r -= a * lo;
                }
                VarMap::Mirror { col, hi } => {
                    out[col] -= a;
                    r -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, r)
    };

    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new(); // (coeffs, rhs, has_slack)
    for (a, b) in lp.ineq_a.iter().zip(&lp.ineq_b) {
        let (c, r) = transform(a, *b);
        rows.push((c, r, true));
    }
    for &(col, width) in &bound_rows {
        let mut c = vec![0.0; n_struct];
        c[col] = 1.0;
        rows.push((c, width, true));
    }
    for (a, b) in lp.eq_a.iter().zip(&lp.eq_b) {
        let (c, r) = transform(a, *b);
        rows.push((c, r, false));
    }
    let n_slack = rows.iter().filter(|r| r.2).count();
    let m = rows.len();
    let n_real = n_struct + n_slack;
    let width = n_real + m + 1; // + artificials + rhs
    let rhs_col = width - 1;

    let mut tab = vec![vec![0.0; width]; m];
    let mut slack = n_struct;
    for (i, (coeffs, rhs, has_slack)) in rows.iter().enumerate() {
        tab[i][..n_struct].copy_from_slice(coeffs);
        if *has_slack {
            tab[i][slack] = 1.0;
            slack += 1;
        }
        tab[i][rhs_col] = *rhs;
        if *rhs < 0.0 {
            for v in tab[i][..n_real].iter_mut() {
                *v = -*v;
            }
            tab[i][rhs_col] = -rhs;
        }
        tab[i][n_real + i] = 1.0;
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n_real + i).collect();

    // Phase 1: minimize the sum of artificials.
    let mut phase1_cost = vec![0.0; n_real + m];
    phase1_cost[n_real..].iter_mut().for_each(|c| *c = 1.0);
    if run_simplex(&mut tab, &mut basis, &phase1_cost, n_real + m)? == Outcome::Unbounded {
        return Err(Error::NumericalFailure("phase one reported unbounded".into()));
    }
    let infeas: f64 = basis.iter().enumerate().filter(|(_, &b)| b >= n_real).map(|(i, _)| tab[i][rhs_col]).sum();
    let scale = 1.0 + rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
    if infeas > FEAS_TOL * scale {
        return Ok(LpSolution::without(LpStatus::Infeasible));
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.len() {
        if basis[i] >= n_real {
            match (0..n_real).find(|&j| tab[i][j].abs() > PIVOT_TOL) {
                Some(j) => pivot(&mut tab, &mut basis, i, j),
                None => {
                    tab.remove(i);
                    basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 on real columns only.
    let sign = if sense == Sense::Max { -1.0 } else { 1.0 };
    let mut cost = vec![0.0; n_real];
    for (j, c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, .. } => cost[col] += sign * c,
            VarMap::Mirror { col, .. } => cost[col] -= sign * c,
            VarMap::Split { pos, neg } => {
                cost[pos] += sign * c;
                cost[neg] -= sign * c;
            }
        }
    }
    if run_simplex(&mut tab, &mut basis, &cost, n_real)? == Outcome::Unbounded {
        return Ok(LpSolution::without(LpStatus::Unbounded));
    }

    let mut y = vec![0.0; n_real];
    for (i, &b) in basis.iter().enumerate() {
        y[b] = tab[i][rhs_col];
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Mirror { col, hi } => hi - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let active = check_and_collect_active(lp, &x)?;
    Ok(LpSolution { status: LpStatus::Optimal, value, x, active })
}

#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
}

/// Bland's-rule primal simplex over columns `0..ncols`.
fn run_simplex(tab: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], ncols: usize) -> Result<Outcome> {
    let rhs_col = tab.first().map(|r| r.len() - 1).unwrap_or(0);
    for _ in 0..MAX_ITERATIONS {
        let entering = (0..ncols).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let d = cost[j] - basis.iter().enumerate().map(|(i, &b)| cost[b] * tab[i][j]).sum::<f64>();
            d < -COST_TOL
        });
        let Some(j) = entering else { return Ok(Outcome::Optimal) };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[j] > PIVOT_TOL {
                let ratio = row[rhs_col].max(0.0) / row[j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) => {
                        if ratio < best - 1e-12 || (ratio <= best + 1e-12 && basis[i] < basis[k]) {
                            Some((i, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else { return Ok(Outcome::Unbounded) };
        pivot(tab, basis, i, j);
    }
    Err(Error::NumericalFailure(format!("simplex did not terminate in {MAX_ITERATIONS} iterations")))
}

fn pivot(tab: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = tab[row][col];
    tab[row].iter_mut().for_each(|v| *v /= p);
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i != row {
            let f = r[col];
            if f != 0.0 {
                r.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                r[col] = 0.0;
            }
        }
    }
    basis[row] = col;
}

fn check_and_collect_active(lp: &LinearProgram, x: &[f64]) -> Result<Vec<ActiveConstraint>> {
    let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let mut active = Vec::new();
    for (i, (a, b)) in lp.ineq_a.iter().zip(&lp.ineq_b).enumerate() {
        let s = b - dot(a);
        let tol = FEAS_TOL * (1.0 + b.abs());
        if s < -tol {
            return Err(Error::NumericalFailure(format!("inequality {i} violated by {}", -s)));
        }
        if s <= tol {
            active.push(ActiveConstraint::Inequality(i));
        }
    }
    for (i, (a, f)) in lp.eq_a.iter().zip(&lp.eq_b).enumerate() {
        if (dot(a) - f).abs() > FEAS_TOL * (1.0 + f.abs()) {
            return Err(Error::NumericalFailure(format!("equality {i} violated")));
        }
        active.push(ActiveConstraint::Equality(i));
    }
    for (j, v) in x.iter().enumerate() {
        if let Some(lo) = lp.lower[j] {
            if *v < lo - FEAS_TOL * (1.0 + lo.abs()) {
                return Err(Error::NumericalFailure(format!("lower bound {j} violated")));
            }
            if (*v - lo).abs() <= FEAS_TOL * (1.0 + lo.abs()) {
                active.push(ActiveConstraint::Lower(j));
            }
        }
        if let Some(hi) = lp.upper[j] {
            if *v > hi + FEAS_TOL * (1.0 + hi.abs()) {
                return Err(Error::NumericalFailure(format!("upper bound {j} violated")));
            }
            if (*v - hi).abs() <= FEAS_TOL * (1.0 + hi.abs()) {
                active.push(ActiveConstraint::Upper(j));
            }
        }
    }
    Ok(active)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convexified_minimax_subproblem() {
        // min b over x ≤ a,b ≤ z, x+y ≤ a+b ≤ y+z, a + 5b ≥ 2(x+y+z), (x,y,z) = (1,2,5)
        let (x, y, z) = (1.0, 2.0, 5.0);
        let mut lp = LinearProgram::new(vec![0.0, 1.0]);
        lp.set_bounds(0, Some(x), Some(z));
        lp.set_bounds(1, Some(x), Some(z));
        lp.add_inequality(vec![-1.0, -1.0], -(x + y));
        lp.add_inequality(vec![1.0, 1.0], y + z);
        lp.add_inequality(vec![-1.0, -5.0], -2.0 * (x + y + z));
        let sol = lp.solve(Sense::Min).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // b = (2x+y+z)/4 and a = (3y+3z-2x)/4
        assert!((sol.value - 9.0 / 4.0).abs() < 1e-12);
        assert!((sol.x[0] - 19.0 / 4.0).abs() < 1e-12 && (sol.x[1] - 9.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_objective_on_a_box() {
        let mut lp = LinearProgram::new(vec![0.0, 0.0]);
        lp.set_bounds(0, Some(-1.0), Some(1.0));
        lp.set_bounds(1, Some(0.0), Some(2.0));
        let sol = lp.solve(Sense::Min).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn unbounded_ray() {
        let lp = LinearProgram::new(vec![1.0]).with_lower_bounds(vec![0.0]);
        assert_eq!(lp.solve(Sense::Max).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_system() {
        let lp = LinearProgram::new(vec![1.0])
            .with_inequalities(vec![vec![1.0]], vec![1.0])
            .with_equalities(vec![vec![1.0]], vec![2.0]);
        assert_eq!(lp.solve(Sense::Min).unwrap().status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.set_bounds(0, Some(2.0), Some(1.0));
        assert_eq!(lp.solve(Sense::Min).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_equalities_and_free_variables() {
        // min x - y with x + y = 1 (twice), -3 ≤ x - y
        let lp = LinearProgram::new(vec![1.0, -1.0])
            .with_equalities(vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![1.0, 2.0])
            .with_inequalities(vec![vec![-1.0, 1.0]], vec![3.0]);
        let sol = lp.solve(Sense::Min).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.value + 3.0).abs() < 1e-12);
        assert!(sol.active.contains(&ActiveConstraint::Inequality(0)));
    }

    #[test]
    fn upper_only_bound() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.set_bounds(0, None, Some(4.0));
        let sol = lp.solve(Sense::Max).unwrap();
        assert!((sol.value - 4.0).abs() < 1e-12);
        assert_eq!(sol.active, vec![ActiveConstraint::Upper(0)]);
    }

    #[test]
    fn rejects_malformed() {
        let lp = LinearProgram::new(vec![1.0]).with_inequalities(vec![vec![1.0, 2.0]], vec![1.0]);
        assert!(lp.solve(Sense::Min).is_err());
    }
}
