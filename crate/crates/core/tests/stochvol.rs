use effico::stochvol::mixture::LogNormalMixture;
use effico::stochvol::quadrature::gauss_legendre_on;
use effico::stochvol::{
    maximin_value_g, moment_matched_targets, normal, superhedge_cost_distribution, CostIntegrator, RegimeSwitchModel,
    TargetDistribution,
};
use effico::Error;
use proptest::prelude::*;

fn model() -> impl Strategy<Value = RegimeSwitchModel> {
    (0.01f64..0.1, 0.1f64..0.5, 0.05f64..1.0, 0.1f64..0.9)
        .prop_map(|(mu, sh, ratio, p)| RegimeSwitchModel::new(mu, sh, sh * ratio, p, 1.0, 1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn quantiles_invert_cdfs(m in model(), qv in 0.02f64..0.98, u in 0.001f64..0.999) {
        let x = m.quantile_stock(u).unwrap();
        prop_assert!((m.cdf_stock(x).unwrap() - u).abs() <= 1e-12);
        let k = m.quantile_kernel(qv, u).unwrap();
        prop_assert!((m.cdf_kernel(qv, k).unwrap() - u).abs() <= 1e-12);
    }

    #[test]
    fn kernels_price_the_stock(m in model(), qv in 0.02f64..0.98) {
        // E[ξ] = 1 and E[ξ S_T] = S0 by quadrature in each regime's score
        let (z, w) = gauss_legendre_on(200, -8.0, 8.0);
        let law = m.kernel_law(qv).unwrap();
        let (th, tl) = m.theta();
        let mut mass = 0.0;
        let mut stock = 0.0;
        for ((pc, (mk, sk)), (theta, sigma)) in
            [(law.p, law.high), (1.0 - law.p, law.low)].into_iter().zip([(th, m.sigma_high), (tl, m.sigma_low)])
        {
            for (zi, wi) in z.iter().zip(&w) {
                // ξ = exp(mk + sk z) with W = −z (sk = θ√T, T = 1) and
                // S_T = S0 exp(μ − σ²/2 + σW); the density ξφ(z) is tilted by
                // hand into e^{mk + sk²/2} φ(z − sk)
                let zt = zi + sk;
                let tilt = (mk + 0.5 * sk * sk).exp();
                let s = m.s0 * (m.mu - 0.5 * sigma * sigma - sigma * zt * (sk / theta)).exp();
                let d = wi * normal::pdf(*zi) * tilt;
                mass += pc * d;
                stock += pc * d * s;
            }
        }
        prop_assert!((mass - 1.0).abs() <= 1e-10);
        prop_assert!((stock - m.s0).abs() <= 1e-10);
    }

    #[test]
    fn stock_target_never_costs_more_than_s0(m in model(), qv in 0.05f64..0.95) {
        let g = maximin_value_g(&m, qv, &TargetDistribution::MixtureStock(m)).unwrap();
        prop_assert!(g <= m.s0 + 1e-9, "g = {}", g);
    }
}

#[test]
fn normal_cdf_reference_values() {
    assert_eq!(normal::cdf(0.0), 0.5);
    assert!((normal::cdf(1.0) - 0.841_344_746_068_542_9).abs() <= 1e-15);
    assert!((normal::cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() <= 1e-17);
    for p in [1e-10, 0.01, 0.3, 0.5, 0.9, 0.999] {
        assert!((normal::cdf(normal::inv_cdf(p)) - p).abs() <= 1e-15 * p.max(1e-3) * 1e3);
    }
}

#[test]
fn mixture_with_equal_components_is_lognormal() {
    let mix = LogNormalMixture { p: 0.4, high: (0.1, 0.2), low: (0.1, 0.2) };
    for u in [0.01, 0.25, 0.5, 0.75, 0.99] {
        let want = (0.1 + 0.2 * normal::inv_cdf(u)).exp();
        assert!((mix.quantile(u).unwrap() - want).abs() <= 1e-12 * want);
    }
    assert!((mix.alpha_star(0.3).unwrap() - 0.3).abs() <= 1e-12);
}

#[test]
fn gap_is_positive_for_distinct_volatilities() {
    let m = RegimeSwitchModel::default();
    let cost = superhedge_cost_distribution(&m, &TargetDistribution::MixtureStock(m)).unwrap();
    assert!(cost.value < m.s0 - 1e-4);
    assert!(!cost.near_endpoint);
    // the maximizer beats the grid neighbours
    for dq in [-0.01, 0.01] {
        let g = maximin_value_g(&m, cost.q_star.q + dq, &TargetDistribution::MixtureStock(m)).unwrap();
        assert!(g <= cost.value + 1e-12);
    }
}

#[test]
fn quadrature_is_converged() {
    let m = RegimeSwitchModel::default();
    let t = moment_matched_targets(&m).unwrap();
    for target in [t.normal, t.lognormal, TargetDistribution::MixtureStock(m)] {
        for qv in [0.05, 0.5, 0.95] {
            let a = CostIntegrator::new(&target, 400).unwrap().g(&m, qv).unwrap();
            let b = CostIntegrator::new(&target, 800).unwrap().g(&m, qv).unwrap();
            assert!((a - b).abs() <= 1e-10, "{target:?} q={qv}: {a} vs {b}");
        }
    }
}

#[test]
fn moment_matching() {
    let m = RegimeSwitchModel::default();
    let t = moment_matched_targets(&m).unwrap();
    for target in [t.normal, t.lognormal] {
        assert!((target.mean() - m.mean_stock()).abs() <= 1e-12);
        assert!((target.variance() - m.variance_stock()).abs() <= 1e-12);
    }
}

#[test]
fn invalid_models_rejected() {
    assert!(RegimeSwitchModel::new(0.05, 0.1, 0.2, 0.5, 1.0, 1.0).is_err());
    assert!(RegimeSwitchModel::new(0.05, 0.2, 0.1, 1.5, 1.0, 1.0).is_err());
    assert!(RegimeSwitchModel::new(0.05, 0.2, 0.1, 0.5, 0.0, 1.0).is_err());
    let m = RegimeSwitchModel::default();
    assert!(matches!(m.kernel_law(0.0), Err(Error::ProbabilityOutOfRange(_))));
    assert!(matches!(m.quantile_stock(1.0), Err(Error::ProbabilityOutOfRange(_))));
}
