use std::ffi::{CStr, CString};
use std::ptr;

use effico_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = effico_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn three_state_value_is_exact() {
    let (x, y, z) = (cstr("1"), cstr("2"), cstr("5"));
    let (mut num, mut den) = (0i64, 0i64);
    let cases =
        [(EfficoProblem::Maximin, 9, 4), (EfficoProblem::ConvexifiedMinimax, 9, 4), (EfficoProblem::Minimax, 7, 3)];
    for (problem, n, d) in cases {
        let s = unsafe { effico_three_state_value(x.as_ptr(), y.as_ptr(), z.as_ptr(), problem, &mut num, &mut den) };
        assert_eq!(s, EfficoStatus::Ok);
        assert_eq!((num, den), (n, d), "{problem:?}");
    }
}

#[test]
fn three_state_json_round_trips() {
    let (x, y, z) = (cstr("0"), cstr("1/2"), cstr("3"));
    let mut out = ptr::null_mut();
    let s =
        unsafe { effico_three_state_json(x.as_ptr(), y.as_ptr(), z.as_ptr(), EfficoProblem::Maximin, false, &mut out) };
    assert_eq!(s, EfficoStatus::Ok);
    let json: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    unsafe { effico_string_free(out) };
    // δ1 = 2·0 − 3/2 + 3 > 0, so the value is (2x + y + z)/4
    assert_eq!(json["value"], "7/8");
}

#[test]
fn ordering_violation_is_invalid_input() {
    let (x, y, z) = (cstr("2"), cstr("2"), cstr("5"));
    let (mut num, mut den) = (0i64, 0i64);
    let s = unsafe {
        effico_three_state_value(x.as_ptr(), y.as_ptr(), z.as_ptr(), EfficoProblem::Minimax, &mut num, &mut den)
    };
    assert_eq!(s, EfficoStatus::InvalidInput);
    assert!(last_error().contains("strictly ordered"));
}

#[test]
fn null_and_utf8_arguments_are_reported() {
    let y = cstr("2");
    let z = cstr("3");
    let (mut num, mut den) = (0i64, 0i64);
    let s = unsafe {
        effico_three_state_value(ptr::null(), y.as_ptr(), z.as_ptr(), EfficoProblem::Maximin, &mut num, &mut den)
    };
    assert_eq!(s, EfficoStatus::NullPointer);
    assert!(last_error().contains("`x`"));

    let bad = [0xffu8, 0];
    let s = unsafe {
        effico_three_state_value(
            bad.as_ptr().cast(),
            y.as_ptr(),
            z.as_ptr(),
            EfficoProblem::Maximin,
            &mut num,
            &mut den,
        )
    };
    assert_eq!(s, EfficoStatus::InvalidUtf8);

    let mut m = ptr::null_mut();
    assert_eq!(unsafe { effico_market_canonical(ptr::null_mut()) }, EfficoStatus::NullPointer);
    assert_eq!(unsafe { effico_market_canonical(&mut m) }, EfficoStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { effico_solution_value(ptr::null(), &mut v) }, EfficoStatus::NullPointer);
    unsafe { effico_market_free(m) };
    unsafe { effico_market_free(ptr::null_mut()) };
}

#[test]
fn generic_solve_matches_closed_form() {
    let mut market = ptr::null_mut();
    let mut dist = ptr::null_mut();
    let atoms = [1.0, 2.0, 5.0];
    unsafe {
        assert_eq!(effico_market_canonical(&mut market), EfficoStatus::Ok);
        assert_eq!(effico_market_states(market), 3);
        assert_eq!(effico_distribution_new(atoms.as_ptr(), 3, &mut dist), EfficoStatus::Ok);
        for (problem, expected) in [(EfficoProblem::Maximin, 2.25), (EfficoProblem::Minimax, 7.0 / 3.0)] {
            let mut sol = ptr::null_mut();
            assert_eq!(effico_solve(market, dist, problem, &mut sol), EfficoStatus::Ok);
            let mut v = 0.0;
            assert_eq!(effico_solution_value(sol, &mut v), EfficoStatus::Ok);
            assert!((v - expected).abs() < 1e-9, "{problem:?}: {v}");
            assert!(effico_solution_optimizer_count(sol) >= 1);
            let mut json = ptr::null_mut();
            assert_eq!(effico_solution_to_json(sol, true, &mut json), EfficoStatus::Ok);
            assert!(CStr::from_ptr(json).to_str().unwrap().contains("optimizers"));
            effico_string_free(json);
            effico_solution_free(sol);
        }
        effico_distribution_free(dist);
        effico_market_free(market);
    }
}

#[test]
fn market_constructors_agree() {
    let s0 = [2.0];
    let s_t = [4.0, 2.0, 1.0];
    let json = cstr(r#"{"n": 3, "s0": [2], "sT": [["4", "2", "1"]]}"#);
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(effico_market_new(s0.as_ptr(), 1, s_t.as_ptr(), 3, &mut a), EfficoStatus::Ok);
        assert_eq!(effico_market_from_json(json.as_ptr(), &mut b), EfficoStatus::Ok);
        assert_eq!(effico_market_states(a), effico_market_states(b));
        effico_market_free(a);
        effico_market_free(b);
    }
    // S0 above every terminal price admits no kernel: a property of the input
    let s0 = [5.0];
    let mut m = ptr::null_mut();
    let s = unsafe { effico_market_new(s0.as_ptr(), 1, s_t.as_ptr(), 3, &mut m) };
    assert_eq!(s, EfficoStatus::InvalidInput);
    assert!(last_error().contains("infeasible"));
    assert!(m.is_null());
    let bad = cstr("{not json");
    assert_eq!(unsafe { effico_market_from_json(bad.as_ptr(), &mut m) }, EfficoStatus::InvalidInput);
}

#[test]
fn optimal_wealth_log() {
    let mut w = EfficoWealth::default();
    assert_eq!(unsafe { effico_optimal_wealth(EfficoUtility::Log, 0.0, 1.0, &mut w) }, EfficoStatus::Ok);
    // log utility: x* solves 1/x = 2/(3 − 2x), i.e. x* = 3/4
    assert!((w.x_star - 0.75).abs() < 1e-9);
    assert!((w.payoff[0] - 1.5).abs() < 1e-9 && w.payoff[1] == 1.0);
    let expected = (1.5f64.ln() + 0.0 + 0.75f64.ln()) / 3.0;
    assert!((w.value - expected).abs() < 1e-9);
    let s = unsafe { effico_optimal_wealth(EfficoUtility::Power, 1.5, 1.0, &mut w) };
    assert_eq!(s, EfficoStatus::InvalidInput);
}

#[test]
fn stochvol_gap_and_curve() {
    let mut model = ptr::null_mut();
    unsafe {
        assert_eq!(effico_regime_model_default(&mut model), EfficoStatus::Ok);
        let mut gap = EfficoGap::default();
        assert_eq!(effico_stochvol_gap(model, &mut gap), EfficoStatus::Ok);
        assert_eq!(gap.s0, 1.0);
        assert!(gap.gap > 0.0 && (gap.s0 - gap.cost - gap.gap).abs() < 1e-15);

        let v = [0.02, 0.05];
        let (mut n, mut l) = ([0.0; 2], [0.0; 2]);
        assert_eq!(effico_stochvol_curve(model, v.as_ptr(), 2, 2, n.as_mut_ptr(), l.as_mut_ptr()), EfficoStatus::Ok);
        let rows = effico::stochvol::figure2_curve(&effico::stochvol::RegimeSwitchModel::default(), &v, 1).unwrap();
        for (i, r) in rows.iter().enumerate() {
            assert_eq!((n[i], l[i]), (r.cost_normal, r.cost_lognormal));
        }
        // more dispersion makes the target cheaper
        assert!(n[1] < n[0] && l[1] < l[0]);
        assert_eq!(
            effico_stochvol_curve(model, v.as_ptr(), 2, 1, ptr::null_mut(), l.as_mut_ptr()),
            EfficoStatus::NullPointer
        );
        effico_regime_model_free(model);

        let mut bad = ptr::null_mut();
        let s = effico_regime_model_new(0.05, 0.1, 0.2, 0.5, 1.0, 1.0, &mut bad);
        assert_eq!(s, EfficoStatus::InvalidInput);
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(effico_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
