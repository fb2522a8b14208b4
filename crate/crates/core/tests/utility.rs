use effico::efficiency::three_state::is_attainable_f64;
use effico::rational::{q, qi, Q};
use effico::utility::{brute_force_theta, ce_check, ds06_closed_form, foc, optimal_wealth, ThetaRange, UtilityKind};
use effico::Error;
use proptest::prelude::*;

fn kinds() -> Vec<UtilityKind> {
    vec![UtilityKind::Log, UtilityKind::Exp, UtilityKind::power(-1.0).unwrap(), UtilityKind::power(0.5).unwrap()]
}

fn kernel_price(u: f64, z: &[f64; 3]) -> f64 {
    let xi = [3.0 * u, 3.0 - 9.0 * u, 6.0 * u];
    xi.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn optimal_payoff_invariants(x0 in 0.1f64..10.0) {
        for kind in kinds() {
            let sol = optimal_wealth(&kind, x0).unwrap();
            prop_assert!(foc(&kind, x0, sol.x_star).abs() < 1e-10, "{}", kind.name());
            prop_assert!(sol.x_star < x0);
            prop_assert!(is_attainable_f64(&sol.payoff));
            for u in [0.0, 0.125, 0.2, 0.25, 1.0 / 3.0] {
                prop_assert!((kernel_price(u, &sol.payoff) - x0).abs() <= 1e-12 * x0.max(1.0));
            }
            let ds = ds06_closed_form(&kind, x0).unwrap();
            prop_assert!((ds.x_star - sol.x_star).abs() <= 1e-10 * x0.max(1.0));
        }
    }

    #[test]
    fn power_is_homogeneous(x0 in 0.1f64..5.0, lambda in 0.1f64..10.0, alpha in prop::sample::select(vec![-2.0, -1.0, 0.3, 0.5, 0.9])) {
        let kind = UtilityKind::power(alpha).unwrap();
        let a = optimal_wealth(&kind, lambda * x0).unwrap().x_star;
        let b = lambda * optimal_wealth(&kind, x0).unwrap().x_star;
        prop_assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
    }

    #[test]
    fn no_other_attainable_payoff_does_better(x0 in 0.2f64..5.0, theta_frac in -0.45f64..0.95) {
        // every budget-x0 attainable payoff is (x0 + 2θ, x0, x0 − θ)
        let theta = theta_frac * x0;
        let payoff = [x0 + 2.0 * theta, x0, x0 - theta];
        for kind in kinds() {
            let best = optimal_wealth(&kind, x0).unwrap();
            let v = payoff.iter().map(|&p| kind.u(p)).sum::<f64>() / 3.0;
            prop_assert!(v <= best.value + 1e-12);
        }
    }
}

#[test]
fn grid_search_converges_to_the_optimum() {
    let x0 = 1.0;
    let sol = optimal_wealth(&UtilityKind::Log, x0).unwrap();
    let search = brute_force_theta(f64::ln, x0, 1e-4, ThetaRange::Nonnegative, None).unwrap();
    assert!((search.best.value - sol.value).abs() < 1e-6);
    assert!((search.best.theta - 0.25).abs() < 1e-3);
    assert!((search.best.payoff[0] - 1.5).abs() < 2e-3);
}

#[test]
fn convex_objective_reference_point() {
    // U(x) = x² on x ≥ 0: θ = −1/5 is a critical point of a convex function
    let square = |x: f64| if x >= 0.0 { x * x } else { f64::NEG_INFINITY };
    for range in [ThetaRange::Nonnegative, ThetaRange::Stated] {
        let search = brute_force_theta(square, 1.0, 1e-3, range, Some(-0.2)).unwrap();
        let reference = search.reference.clone().unwrap();
        assert!((reference.value - 14.0 / 15.0).abs() < 1e-12);
        assert_eq!(reference.payoff, [0.6, 1.0, 1.2]);
        assert!(search.best.value > reference.value + 0.1, "{range:?}");
        let (lo, hi) = search.range;
        assert!(search.best.theta == lo || search.best.theta == hi);
    }
    let nonneg = brute_force_theta(square, 1.0, 1e-3, ThetaRange::Nonnegative, None).unwrap();
    assert_eq!(nonneg.range, (-0.5, 1.0));
    // θ = 1 gives (3, 1, 0) with objective 10/3
    assert!((nonneg.best.value - 10.0 / 3.0).abs() < 1e-12);
}

#[test]
fn linear_objective_prefers_the_right_end() {
    let s = brute_force_theta(|x| x, 1.0, 0.01, ThetaRange::Nonnegative, None).unwrap();
    assert_eq!(s.best.theta, 1.0);
    assert!((s.best.value - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn ce_check_of_the_convex_example() {
    let payoff: [Q; 3] = [q(3, 5), qi(1), q(6, 5)];
    let c = ce_check(&payoff).unwrap();
    assert!(!c.perfectly_ce);
    assert_eq!(c.optimizer, [q(6, 5), q(22, 25), q(18, 25)]);
    assert!(c.optimizer_dominated);
}

#[test]
fn ce_check_of_optimal_wealth_is_perfect() {
    // the log optimum at x0 = 4: (6, 4, 3)
    let c = ce_check(&[qi(6), qi(4), qi(3)]).unwrap();
    assert!(c.perfectly_ce);
    assert_eq!(c.value, qi(4));
    assert!(!ce_check(&[qi(3), qi(2), qi(1)]).unwrap().perfectly_ce);
    assert!(ce_check(&[qi(2), qi(2), qi(2)]).unwrap().perfectly_ce);
}

#[test]
fn invalid_power_rejected() {
    for alpha in [0.0, 1.0, 1.5] {
        assert!(matches!(UtilityKind::power(alpha), Err(Error::InvalidInput(_))));
    }
}

#[test]
fn custom_utility_without_sign_change_fails() {
    // linear utility: u′(x) − 2u′(·) = −1 everywhere
    let linear = UtilityKind::custom(|x| x, |_| 1.0, 0.0);
    assert!(matches!(optimal_wealth(&linear, 1.0), Err(Error::BracketFailure { .. })));
    let sqrt = UtilityKind::custom(f64::sqrt, |x| 0.5 / x.sqrt(), 0.0);
    let s = optimal_wealth(&sqrt, 1.0).unwrap();
    assert!((s.x_star - optimal_wealth(&UtilityKind::power(0.5).unwrap(), 1.0).unwrap().x_star).abs() < 1e-12);
}
