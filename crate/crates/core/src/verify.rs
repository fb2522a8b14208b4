//! Built-in oracle suites: each check compares a solver against an
//! independent computation (brute force, a second method, or a known value).

use serde_json::{json, Value};

use crate::distribution::{
    cost_efficient_candidate, is_convex_dominated, mean_preserving_contraction, DiscreteDistribution, Randomizer,
};
use crate::efficiency::kkm::{in_response_set_direct, kkm_diagnostics};
use crate::efficiency::three_state::{
    canonical_price, convexified_minimax_by_vertices, three_state_closed_form, ThreeStateInput,
};
use crate::efficiency::{generic, ProblemKind};
use crate::lp::{LinearProgram, LpStatus, Sense};
use crate::market::{kernel_family, price, superhedge_cost, DiscreteMarket, Payoff};
use crate::rational::{q, qi, to_f64, Q};
use crate::stochvol::mixture::LogNormalMixture;
use crate::stochvol::{maximin_value_g, normal, RegimeSwitchModel, TargetDistribution};
use crate::utility::{analytic_x_star, ds06_closed_form, optimal_wealth, UtilityKind};
use crate::{Error, Result};

pub const SUITES: [&str; 6] = ["market", "distribution", "lp", "efficiency", "utility", "stochvol"];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

struct Recorder {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn new(suite: &'static str) -> Self {
        Recorder { suite, checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { suite: self.suite, name: name.into(), passed, detail: detail.into() });
    }

    /// Records a failed check for an unexpected error.
    fn attempt(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.check(name, false, format!("error: {e}"));
        }
    }

    fn close(&mut self, name: impl Into<String>, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.check(name, ok, format!("got {got}, expected {want} (tol {tol:e})"));
    }
}

pub fn run_all() -> Vec<Check> {
    SUITES.iter().flat_map(|s| run_suite(s).expect("known suite")).collect()
}

pub fn run_suite(name: &str) -> Result<Vec<Check>> {
    let checks = match name {
        "market" => market_suite(),
        "distribution" => distribution_suite(),
        "lp" => lp_suite(),
        "efficiency" => efficiency_suite(),
        "utility" => utility_suite(),
        "stochvol" => stochvol_suite(),
        other => {
            return Err(Error::InvalidInput(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", "))))
        }
    };
    Ok(checks)
}

/// One line per check: `PASS suite/name: detail`.
pub fn render(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{tag} {}/{}: {}\n", c.suite, c.name, c.detail));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    out
}

pub fn to_json(checks: &[Check]) -> Value {
    let items: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "suite": c.suite, "name": c.name, "passed": c.passed, "detail": c.detail }))
        .collect();
    json!({ "checks": items, "failed": checks.iter().filter(|c| !c.passed).count() })
}

fn market_suite() -> Vec<Check> {
    let mut r = Recorder::new("market");
    r.attempt("canonical family", |r| {
        let family = kernel_family(&DiscreteMarket::canonical())?;
        let seg = family.as_segment().ok_or_else(|| Error::NumericalFailure("expected a segment".into()))?;
        for u in [0.0, 0.1, 0.25, 1.0 / 3.0] {
            let xi = seg.kernel_at(u);
            let want = [3.0 * u, 3.0 - 9.0 * u, 6.0 * u];
            let err = xi.0.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            r.close(format!("kernel at u={u:.4}"), err, 0.0, 1e-12);
            r.close(format!("stock repriced at u={u:.4}"), price(&xi, &Payoff(vec![4.0, 2.0, 1.0]))?, 2.0, 1e-12);
        }
        r.close("u range low", seg.u_lo, 0.0, 1e-12);
        r.close("u range high", seg.u_hi, 1.0 / 3.0, 1e-12);
        Ok(())
    });
    r.attempt("superhedge vs dense grid", |r| {
        let family = kernel_family(&DiscreteMarket::canonical())?;
        let seg = family.as_segment().expect("segment").clone();
        for z in [[3.0, 2.0, 1.0], [1.0, 2.0, 3.0], [5.0, 1.0, 2.0], [-1.0, 4.0, 0.5]] {
            let cost = superhedge_cost(&family, &Payoff(z.to_vec()))?.value;
            let brute = (0..=3000)
                .map(|i| price(&seg.kernel_at(i as f64 / 9000.0), &Payoff(z.to_vec())).unwrap_or(f64::NAN))
                .fold(f64::NEG_INFINITY, f64::max);
            r.close(format!("cost of {z:?}"), cost, brute, 1e-9);
        }
        Ok(())
    });
    r.attempt("complete two-state market", |r| {
        let m = DiscreteMarket::new(vec![2.0], vec![vec![3.0, 1.0]])?;
        let family = kernel_family(&m)?;
        let verts = family.vertices();
        r.check("single kernel", verts.len() == 1, format!("{} vertices", verts.len()));
        r.close("kernel state 1", verts[0].0[0], 1.0, 1e-12);
        Ok(())
    });
    r.checks
}

fn distribution_suite() -> Vec<Check> {
    let mut r = Recorder::new("distribution");
    r.attempt("quantiles", |r| {
        let d = DiscreteDistribution::new(vec![4.0, 1.0, 2.0])?;
        for (p, want) in [(0.1, 1.0), (1.0 / 3.0, 1.0), (0.34, 2.0), (2.0 / 3.0, 2.0), (0.9, 4.0), (1.0, 4.0)] {
            r.close(format!("F^-1({p:.3})"), d.quantile(p)?, want, 0.0);
        }
        Ok(())
    });
    r.attempt("anti-comonotone candidate", |r| {
        let d = DiscreteDistribution::new(vec![1.0, 2.0, 3.0])?;
        let z = cost_efficient_candidate(&d, &[0.5, 2.0, 0.5], &Randomizer::Draws(vec![0.2, 0.5, 0.8]))?;
        // the largest kernel state gets the smallest value; ties split by V
        r.check("pairing", z.0 == vec![3.0, 1.0, 2.0], format!("{:?}", z.0));
        Ok(())
    });
    r.attempt("convex order", |r| {
        let d = DiscreteDistribution::new(vec![1.0, 2.0, 4.0])?;
        for t in [0.0, 0.25, 0.5, 1.0, 1.5] {
            let c = mean_preserving_contraction(&d, t)?;
            r.close(format!("mean kept t={t}"), c.mean(), d.mean(), 1e-12);
            r.check(format!("contraction dominated t={t}"), is_convex_dominated(&c, &d), "");
        }
        let spread = DiscreteDistribution::new(vec![0.0, 2.0, 5.0])?;
        r.check("spread not dominated", !is_convex_dominated(&spread, &d), "");
        Ok(())
    });
    r.checks
}

fn lp_suite() -> Vec<Check> {
    let mut r = Recorder::new("lp");
    r.attempt("textbook optimum", |r| {
        // max x + y s.t. x + 2y ≤ 4, 3x + y ≤ 6, x, y ≥ 0  → (8/5, 6/5)
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_inequality(vec![1.0, 2.0], 4.0);
        lp.add_inequality(vec![3.0, 1.0], 6.0);
        lp.set_bounds(0, Some(0.0), None);
        lp.set_bounds(1, Some(0.0), None);
        let sol = lp.solve(Sense::Max)?;
        r.check("optimal", sol.status == LpStatus::Optimal, format!("{:?}", sol.status));
        r.close("value", sol.value, 2.8, 1e-9);
        r.close("x", sol.x[0], 1.6, 1e-9);
        Ok(())
    });
    r.attempt("status detection", |r| {
        let mut inf = LinearProgram::new(vec![1.0]);
        inf.add_inequality(vec![1.0], -1.0);
        inf.set_bounds(0, Some(0.0), None);
        r.check("infeasible", inf.solve(Sense::Min)?.status == LpStatus::Infeasible, "");
        let mut unb = LinearProgram::new(vec![1.0]);
        unb.set_bounds(0, Some(0.0), None);
        r.check("unbounded", unb.solve(Sense::Max)?.status == LpStatus::Unbounded, "");
        Ok(())
    });
    r.attempt("degenerate vertex", |r| {
        // three constraints through the optimum (1, 1)
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_inequality(vec![1.0, 0.0], 1.0);
        lp.add_inequality(vec![0.0, 1.0], 1.0);
        lp.add_inequality(vec![1.0, 1.0], 2.0);
        lp.set_bounds(0, Some(0.0), None);
        lp.set_bounds(1, Some(0.0), None);
        r.close("value", lp.solve(Sense::Max)?.value, 2.0, 1e-9);
        Ok(())
    });
    r.checks
}

fn efficiency_suite() -> Vec<Check> {
    let mut r = Recorder::new("efficiency");
    r.attempt("reference values", |r| {
        let cases: [((i64, i64, i64), [Q; 4]); 3] = [
            ((1, 2, 3), [q(9, 5), q(9, 5), q(9, 5), qi(2)]),
            ((1, 2, 4), [qi(2), qi(2), qi(2), qi(2)]),
            ((1, 2, 5), [q(9, 4), q(9, 4), q(9, 4), q(7, 3)]),
        ];
        for ((x, y, z), want) in cases {
            let input = ThreeStateInput::from_ints(x, y, z)?;
            for (kind, w) in ProblemKind::ALL.iter().zip(want) {
                let got = three_state_closed_form(&input, *kind).value;
                r.check(format!("({x},{y},{z}) {}", kind.name()), got == w, format!("got {got}, expected {w}"));
            }
        }
        Ok(())
    });
    r.attempt("generic vs closed form", |r| {
        let market = DiscreteMarket::canonical();
        for (x, y, z) in [(1, 2, 3), (-3, 0, 7), (0, 5, 6), (-10, -9, 10), (2, 4, 8)] {
            let input = ThreeStateInput::from_ints(x, y, z)?;
            let dist = DiscreteDistribution::new(vec![x as f64, y as f64, z as f64])?;
            for kind in ProblemKind::ALL {
                let exact = to_f64(&three_state_closed_form(&input, kind).value);
                let num = generic::solve(&market, &dist, kind)?.value;
                r.close(format!("({x},{y},{z}) {}", kind.name()), num, exact, 1e-9);
            }
        }
        Ok(())
    });
    r.attempt("convexified minimax vs vertex enumeration", |r| {
        for (x, y, z) in [(1, 2, 3), (1, 2, 5), (-4, 1, 2), (0, 1, 9)] {
            let input = ThreeStateInput::from_ints(x, y, z)?;
            let (v, _) = convexified_minimax_by_vertices(&input);
            let got = three_state_closed_form(&input, ProblemKind::ConvexifiedMinimax).value;
            r.check(format!("({x},{y},{z})"), got == v, format!("got {got}, vertices {v}"));
        }
        Ok(())
    });
    r.attempt("minimax optimizer superhedges", |r| {
        let input = ThreeStateInput::from_ints(1, 2, 3)?;
        let set = three_state_closed_form(&input, ProblemKind::MinimaxDF);
        for o in &set.optimizers {
            for z in o.payoff.sample(5) {
                let worst = (0..=120).map(|i| canonical_price(&q(i, 360), &z)).max().expect("grid");
                r.check(format!("{z:?}"), worst == set.value, format!("max price {worst}"));
            }
        }
        Ok(())
    });
    r.attempt("KKM intersections", |r| {
        for ((x, y, z), want) in
            [((1, 2, 5), (q(1, 4), q(1, 4))), ((1, 2, 4), (q(1, 5), q(1, 4))), ((1, 2, 3), (q(1, 5), q(1, 5)))]
        {
            let input = ThreeStateInput::from_ints(x, y, z)?;
            let got = kkm_diagnostics(input).intersection();
            r.check(format!("({x},{y},{z}) closed form"), got == want, format!("{got:?}"));
            // parameters in every response set, from the rearrangement definition on a grid
            let grid: Vec<Q> = (0..=120).map(|i| q(i, 360)).collect();
            let common: Vec<&Q> =
                grid.iter().filter(|u| grid.iter().all(|s| in_response_set_direct(&input, s, u))).collect();
            let ok = common.first() == Some(&&want.0) && common.last() == Some(&&want.1);
            r.check(format!("({x},{y},{z}) direct"), ok, format!("{} grid points in every response set", common.len()));
        }
        Ok(())
    });
    r.checks
}

fn utility_suite() -> Vec<Check> {
    let mut r = Recorder::new("utility");
    r.attempt("closed forms", |r| {
        for x0 in [0.5, 1.0, 2.0] {
            r.close(format!("log x0={x0}"), optimal_wealth(&UtilityKind::Log, x0)?.x_star, 0.75 * x0, 1e-10);
            r.close(format!("exp x0={x0}"), optimal_wealth(&UtilityKind::Exp, x0)?.x_star, x0 - 2f64.ln() / 3.0, 1e-10);
            for alpha in [-1.0, 0.5, 0.9] {
                let beta = alpha / (alpha - 1.0);
                let want = 3.0 * x0 * 2f64.powf(beta - 1.0) / (1.0 + 2f64.powf(beta));
                let kind = UtilityKind::power(alpha)?;
                r.close(format!("power {alpha} x0={x0}"), optimal_wealth(&kind, x0)?.x_star, want, 1e-10);
            }
        }
        Ok(())
    });
    r.attempt("portfolio form agrees", |r| {
        for kind in [UtilityKind::Log, UtilityKind::Exp, UtilityKind::power(0.5)?] {
            let a = ds06_closed_form(&kind, 1.3)?.x_star;
            let b = analytic_x_star(&kind, 1.3).unwrap_or(f64::NAN);
            r.close(format!("{} x*", kind.name()), a, b, 1e-12);
        }
        Ok(())
    });
    r.attempt("budget", |r| {
        let sol = optimal_wealth(&UtilityKind::Log, 1.0)?;
        for u in [0.0, 0.125, 0.2, 0.25, 1.0 / 3.0] {
            let xi = [3.0 * u, 3.0 - 9.0 * u, 6.0 * u];
            let p = xi.iter().zip(sol.payoff).map(|(a, b)| a * b).sum::<f64>() / 3.0;
            r.close(format!("price at u={u:.3}"), p, 1.0, 1e-12);
        }
        Ok(())
    });
    r.checks
}

fn stochvol_suite() -> Vec<Check> {
    let mut r = Recorder::new("stochvol");
    r.close("Phi(0)", normal::cdf(0.0), 0.5, 1e-16);
    r.close("Phi(1.96)", normal::cdf(1.96), 0.975_002_104_851_780, 1e-15);
    r.close("Phi^-1(0.975)", normal::inv_cdf(0.975), 1.959_963_984_540_054, 1e-12);
    r.attempt("mixture quantile round trip", |r| {
        let mix = LogNormalMixture { p: 0.3, high: (0.1, 0.4), low: (-0.05, 0.1) };
        let worst = (1..200)
            .map(|i| {
                let u = i as f64 / 200.0;
                mix.quantile(u).and_then(|x| mix.cdf(x)).map(|c| (c - u).abs()).unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max);
        r.close("max |F(F^-1(u)) - u|", worst, 0.0, 1e-12);
        Ok(())
    });
    r.attempt("complete-market limit", |r| {
        let m = RegimeSwitchModel::new(0.05, 0.2, 0.2, 0.5, 1.0, 1.0)?;
        let g = maximin_value_g(&m, 0.5, &TargetDistribution::MixtureStock(m))?;
        r.close("g(p) = S0", g, 1.0, 1e-6);
        Ok(())
    });
    r.attempt("point-mass target", |r| {
        let m = RegimeSwitchModel::default();
        for qv in [0.05, 0.5, 0.95] {
            let g = maximin_value_g(&m, qv, &TargetDistribution::PointMass { m: 1.3 })?;
            r.close(format!("g({qv})"), g, 1.3, 1e-9);
        }
        Ok(())
    });
    r.checks
}
