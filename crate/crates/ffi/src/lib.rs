//! C ABI over `effico`.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every call returns an [`EfficoStatus`]; on failure
//! `effico_last_error_message` describes the most recent error on the calling
//! thread. Strings returned through out-pointers are owned by the caller and
//! released with `effico_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use effico::distribution::DiscreteDistribution;
use effico::efficiency::three_state::{three_state_closed_form, ThreeStateInput};
use effico::efficiency::{generic, ProblemKind, SolutionSet};
use effico::market::{DiscreteMarket, MarketSpec};
use effico::rational::{parse_q, Q};
use effico::stochvol::{figure2_curve, stochvol_gap, RegimeSwitchModel};
use effico::utility::{optimal_wealth, UtilityKind};

/// Result of every call. Codes 2 and 3 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EfficoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NumericalFailure = 3,
    InvalidUtf8 = 4,
    Overflow = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EfficoProblem {
    Maximin = 0,
    ConvexifiedMaximin = 1,
    ConvexifiedMinimax = 2,
    Minimax = 3,
}

impl From<EfficoProblem> for ProblemKind {
    fn from(p: EfficoProblem) -> Self {
        match p {
            EfficoProblem::Maximin => ProblemKind::MaximinDF,
            EfficoProblem::ConvexifiedMaximin => ProblemKind::ConvexifiedMaximin,
            EfficoProblem::ConvexifiedMinimax => ProblemKind::ConvexifiedMinimax,
            EfficoProblem::Minimax => ProblemKind::MinimaxDF,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EfficoUtility {
    Log = 0,
    Exp = 1,
    /// `x^alpha / alpha`; requires `alpha < 1`, `alpha != 0`.
    Power = 2,
}

/// Optimal expected-utility payoff `(3x0 − 2x*, x0, x*)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EfficoWealth {
    pub x_star: f64,
    pub payoff: [f64; 3],
    pub value: f64,
}

/// Distributional superhedging cost of the stock and its shortfall from `s0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EfficoGap {
    pub s0: f64,
    pub cost: f64,
    pub gap: f64,
    pub q_star: f64,
}

pub struct EfficoMarket(DiscreteMarket);
pub struct EfficoDistribution(DiscreteDistribution);
pub struct EfficoSolution(SolutionSet<f64>);
pub struct EfficoRegimeModel(RegimeSwitchModel);

#[derive(Debug, thiserror::Error)]
enum FfiError {
    #[error("null pointer passed as `{0}`")]
    Null(&'static str),
    #[error("`{0}` is not valid UTF-8")]
    Utf8(&'static str),
    #[error("{0} does not fit in a 64-bit integer")]
    Overflow(String),
    #[error(transparent)]
    Core(#[from] effico::Error),
}

impl FfiError {
    fn status(&self) -> EfficoStatus {
        match self {
            FfiError::Null(_) => EfficoStatus::NullPointer,
            FfiError::Utf8(_) => EfficoStatus::InvalidUtf8,
            FfiError::Overflow(_) => EfficoStatus::Overflow,
            FfiError::Core(e) if e.is_validation() => EfficoStatus::InvalidInput,
            FfiError::Core(_) => EfficoStatus::NumericalFailure,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> EfficoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EfficoStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            e.status()
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            EfficoStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, FfiError> {
    // SAFETY: callers pass either null or a pointer obtained from this library
    unsafe { p.as_ref() }.ok_or(FfiError::Null(name))
}

fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], FfiError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn string<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    // SAFETY: the caller guarantees a NUL-terminated string
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| FfiError::Utf8(name))
}

fn write<T>(out: *mut T, value: T, name: &'static str) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::Null(name));
    }
    // SAFETY: non-null out-pointer supplied by the caller
    unsafe { out.write(value) };
    Ok(())
}

fn write_string(out: *mut *mut c_char, s: String) -> Result<(), FfiError> {
    let c = CString::new(s).map_err(|_| FfiError::Core(effico::Error::InvalidInput("string contains NUL".into())))?;
    write(out, c.into_raw(), "out")
}

fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), FfiError> {
    write(out, Box::into_raw(Box::new(value)), "out")
}

fn release<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: `p` came from `Box::into_raw` in this library and is freed once
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Message of the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn effico_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn effico_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string returned through an out-pointer of this
/// library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn effico_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Market with `n_assets` risky assets over `n_states` equiprobable states.
/// `s_t` is row-major, one row of terminal prices per asset.
///
/// # Safety
/// `s0` must point to `n_assets` doubles and `s_t` to `n_assets * n_states`.
#[no_mangle]
pub unsafe extern "C" fn effico_market_new(
    s0: *const f64,
    n_assets: usize,
    s_t: *const f64,
    n_states: usize,
    out: *mut *mut EfficoMarket,
) -> EfficoStatus {
    guard(|| {
        let s0 = slice(s0, n_assets, "s0")?.to_vec();
        let cells =
            n_assets.checked_mul(n_states).ok_or_else(|| FfiError::Overflow(format!("{n_assets} x {n_states}")))?;
        let flat = slice(s_t, cells, "s_t")?;
        let rows = if n_states == 0 {
            vec![Vec::new(); n_assets]
        } else {
            flat.chunks(n_states).map(<[f64]>::to_vec).collect()
        };
        boxed(out, EfficoMarket(DiscreteMarket::new(s0, rows)?))
    })
}

/// The three-state market `S0 = 2`, `S_T = (4, 2, 1)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_market_canonical(out: *mut *mut EfficoMarket) -> EfficoStatus {
    guard(|| boxed(out, EfficoMarket(DiscreteMarket::canonical())))
}

/// Market from JSON such as `{"n": 3, "s0": [2], "sT": [[4, 2, 1]]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_market_from_json(json: *const c_char, out: *mut *mut EfficoMarket) -> EfficoStatus {
    guard(|| {
        let spec: MarketSpec = serde_json_from(string(json, "json")?)?;
        boxed(out, EfficoMarket(spec.build()?))
    })
}

fn serde_json_from<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, FfiError> {
    serde_json::from_str(s).map_err(|e| FfiError::Core(effico::Error::InvalidInput(e.to_string())))
}

/// Number of states, or 0 for NULL.
///
/// # Safety
/// `market` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn effico_market_states(market: *const EfficoMarket) -> usize {
    market.as_ref().map_or(0, |m| m.0.states())
}

/// # Safety
/// `market` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn effico_market_free(market: *mut EfficoMarket) {
    release(market)
}

/// Equiprobable distribution with the given atoms.
///
/// # Safety
/// `values` must point to `n` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_distribution_new(
    values: *const f64,
    n: usize,
    out: *mut *mut EfficoDistribution,
) -> EfficoStatus {
    guard(|| {
        let v = slice(values, n, "values")?.to_vec();
        boxed(out, EfficoDistribution(DiscreteDistribution::new(v)?))
    })
}

/// # Safety
/// `dist` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn effico_distribution_free(dist: *mut EfficoDistribution) {
    release(dist)
}

/// Solves one of the four cost-efficiency problems with the generic solvers.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_solve(
    market: *const EfficoMarket,
    dist: *const EfficoDistribution,
    problem: EfficoProblem,
    out: *mut *mut EfficoSolution,
) -> EfficoStatus {
    guard(|| {
        let m = non_null(market, "market")?;
        let d = non_null(dist, "dist")?;
        boxed(out, EfficoSolution(generic::solve(&m.0, &d.0, problem.into())?))
    })
}

/// # Safety
/// `solution` must be a live handle and `value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_solution_value(solution: *const EfficoSolution, value: *mut f64) -> EfficoStatus {
    guard(|| write(value, non_null(solution, "solution")?.0.value, "value"))
}

/// Number of optimizer descriptions, or 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn effico_solution_optimizer_count(solution: *const EfficoSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.optimizers.len())
}

/// Full solution as JSON; free the result with `effico_string_free`.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_solution_to_json(
    solution: *const EfficoSolution,
    decimal: bool,
    out: *mut *mut c_char,
) -> EfficoStatus {
    guard(|| write_string(out, non_null(solution, "solution")?.0.to_json(decimal).to_string()))
}

/// # Safety
/// `solution` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn effico_solution_free(solution: *mut EfficoSolution) {
    release(solution)
}

fn three_state_input(x: *const c_char, y: *const c_char, z: *const c_char) -> Result<ThreeStateInput, FfiError> {
    Ok(ThreeStateInput::new(parse_q(string(x, "x")?)?, parse_q(string(y, "y")?)?, parse_q(string(z, "z")?)?)?)
}

fn to_i64(v: i128, what: &Q) -> Result<i64, FfiError> {
    i64::try_from(v).map_err(|_| FfiError::Overflow(format!("{what}")))
}

/// Exact three-state value `num/den` (lowest terms, `den > 0`). Atoms are
/// decimal or `"p/q"` strings with `x < y < z`.
///
/// # Safety
/// String arguments must be NUL-terminated; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn effico_three_state_value(
    x: *const c_char,
    y: *const c_char,
    z: *const c_char,
    problem: EfficoProblem,
    num: *mut i64,
    den: *mut i64,
) -> EfficoStatus {
    guard(|| {
        let v = three_state_closed_form(&three_state_input(x, y, z)?, problem.into()).value;
        write(num, to_i64(*v.numer(), &v)?, "num")?;
        write(den, to_i64(*v.denom(), &v)?, "den")
    })
}

/// Exact three-state solution as JSON (fractions as strings unless
/// `decimal`); free the result with `effico_string_free`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn effico_three_state_json(
    x: *const c_char,
    y: *const c_char,
    z: *const c_char,
    problem: EfficoProblem,
    decimal: bool,
    out: *mut *mut c_char,
) -> EfficoStatus {
    guard(|| {
        let set = three_state_closed_form(&three_state_input(x, y, z)?, problem.into());
        write_string(out, set.to_json(decimal).to_string())
    })
}

/// Optimal payoff in the three-state market for initial wealth `x0`;
/// `alpha` is read only for power utility.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_optimal_wealth(
    kind: EfficoUtility,
    alpha: f64,
    x0: f64,
    out: *mut EfficoWealth,
) -> EfficoStatus {
    guard(|| {
        let k = match kind {
            EfficoUtility::Log => UtilityKind::Log,
            EfficoUtility::Exp => UtilityKind::Exp,
            EfficoUtility::Power => UtilityKind::power(alpha)?,
        };
        let s = optimal_wealth(&k, x0)?;
        write(out, EfficoWealth { x_star: s.x_star, payoff: s.payoff, value: s.value }, "out")
    })
}

/// Regime-switching model; `sigma_high >= sigma_low > 0`, `0 < p <= 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_regime_model_new(
    mu: f64,
    sigma_high: f64,
    sigma_low: f64,
    p: f64,
    horizon: f64,
    s0: f64,
    out: *mut *mut EfficoRegimeModel,
) -> EfficoStatus {
    guard(|| boxed(out, EfficoRegimeModel(RegimeSwitchModel::new(mu, sigma_high, sigma_low, p, horizon, s0)?)))
}

/// `mu = 0.05`, `sigma_high = 0.3`, `sigma_low = 0.15`, `p = 0.5`, `T = 1`, `s0 = 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_regime_model_default(out: *mut *mut EfficoRegimeModel) -> EfficoStatus {
    guard(|| boxed(out, EfficoRegimeModel(RegimeSwitchModel::default())))
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn effico_regime_model_free(model: *mut EfficoRegimeModel) {
    release(model)
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn effico_stochvol_gap(model: *const EfficoRegimeModel, out: *mut EfficoGap) -> EfficoStatus {
    guard(|| {
        let r = stochvol_gap(&non_null(model, "model")?.0)?;
        let gap = EfficoGap { s0: r.s0, cost: r.cost.value, gap: r.gap(), q_star: r.cost.q_star.q };
        write(out, gap, "out")
    })
}

/// Costs of the moment-matched normal and lognormal targets at each of the
/// `n` increasing variances, written to the caller's `n`-element buffers.
///
/// # Safety
/// `variances`, `cost_normal` and `cost_lognormal` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn effico_stochvol_curve(
    model: *const EfficoRegimeModel,
    variances: *const f64,
    n: usize,
    threads: usize,
    cost_normal: *mut f64,
    cost_lognormal: *mut f64,
) -> EfficoStatus {
    guard(|| {
        let m = non_null(model, "model")?;
        let grid = slice(variances, n, "variances")?;
        if cost_normal.is_null() {
            return Err(FfiError::Null("cost_normal"));
        }
        if cost_lognormal.is_null() {
            return Err(FfiError::Null("cost_lognormal"));
        }
        let rows = figure2_curve(&m.0, grid, threads.max(1))?;
        for (i, r) in rows.iter().enumerate() {
            cost_normal.add(i).write(r.cost_normal);
            cost_lognormal.add(i).write(r.cost_lognormal);
        }
        Ok(())
    })
}
