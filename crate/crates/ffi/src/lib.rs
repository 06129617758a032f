//! C ABI for the rough-heston library.
//!
//! Conventions:
//! - every fallible function returns an [`RhStatus`] and writes results through
//!   out-pointers; on failure the out-pointers are left untouched and
//!   [`rh_last_error`] describes the problem;
//! - objects are opaque handles created by `rh_*_new` and released by the
//!   matching `rh_*_free` (passing NULL to a free function is a no-op);
//! - strings returned by the library are owned by the caller and released with
//!   [`rh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use rough_heston::commands::{
    cmd_calibrate_rho, cmd_calibrate_theta, cmd_h0, cmd_largetime, cmd_mc, cmd_rate, cmd_smile,
};
use rough_heston::config::RunConfig;
use rough_heston::export::Format;
use rough_heston::largetime::smile_infinity;
use rough_heston::mgf::{log_mgf, Cgf, LambdaTable, SeriesCgf};
use rough_heston::model::ModelParams;
use rough_heston::pricing::{
    implied_vol, lewis_call, saddle_contour_call, EdgeworthPricer, ExactMgf, OptionKind, OptionQuote, QuadratureSpec,
};
use rough_heston::smalltime::{asymptotic_smile, rate_function};
use rough_heston::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Accuracy = 4,
    NumericalFailure = 5,
    Degenerate = 6,
    Config = 7,
    Io = 8,
    InvalidUtf8 = 9,
    Panic = 10,
}

/// Model parameters (α, λ, θ, ν, ρ, V₀).
pub struct RhModel {
    params: ModelParams,
}

/// A scaled small-time cumulant generating function Λ̄(p).
pub struct RhCgf {
    inner: Box<dyn Cgf + Send>,
}

/// A run configuration for the command interface.
pub struct RhConfig {
    inner: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RhStatus {
    match e {
        Error::Domain(_) => RhStatus::Domain,
        Error::InvalidParameter { .. } => RhStatus::InvalidParameter,
        Error::Accuracy { .. } => RhStatus::Accuracy,
        Error::NumericalFailure { .. } => RhStatus::NumericalFailure,
        Error::Degenerate(_) => RhStatus::Degenerate,
        Error::Config { .. } => RhStatus::Config,
        Error::Io(_) => RhStatus::Io,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), RhStatus>>(f: F) -> RhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RhStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            RhStatus::Panic
        }
    }
}

fn fail(e: Error) -> RhStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> RhStatus {
    set_error(&format!("null pointer: {what}"));
    RhStatus::NullPointer
}

/// # Safety
/// `p` must be NULL or valid for reads of `T`.
unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, RhStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be NULL or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), RhStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// # Safety
/// `s` must be NULL or a NUL-terminated string.
unsafe fn as_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, RhStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        RhStatus::InvalidUtf8
    })
}

/// Message describing the most recent failure on the calling thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by the library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Create a model. α ∈ [½, 1], ν ≥ 0, |ρ| < 1, θ > 0, V₀ > 0.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rh_model_new(
    alpha: f64,
    lambda: f64,
    theta: f64,
    nu: f64,
    rho: f64,
    v0: f64,
    out: *mut *mut RhModel,
) -> RhStatus {
    guard(|| {
        let params = ModelParams::new(alpha, lambda, theta, nu, rho, v0).map_err(fail)?;
        write(out, Box::into_raw(Box::new(RhModel { params })), "out")
    })
}

/// # Safety
/// `model` must be NULL or a handle from [`rh_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rh_model_free(model: *mut RhModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// log E(e^{pX_t}) from an `n_steps` Adams solve; `finite` is set to 0 when
/// the moment explodes before t (the value is then +∞).
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_log_mgf(
    model: *const RhModel,
    p: f64,
    t: f64,
    n_steps: usize,
    value: *mut f64,
    finite: *mut i32,
) -> RhStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let r = log_mgf(&m.params, p, t, n_steps).map_err(fail)?;
        write(value, r.log_mgf, "value")?;
        write(finite, i32::from(r.finite), "finite")
    })
}

/// Λ̄ from its fractional power series with `n_terms` terms (valid inside 90%
/// of the radius of convergence).
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_cgf_series_new(model: *const RhModel, n_terms: usize, out: *mut *mut RhCgf) -> RhStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let cgf = SeriesCgf::new(&m.params, n_terms).map_err(fail)?;
        write(out, Box::into_raw(Box::new(RhCgf { inner: Box::new(cgf) })), "out")
    })
}

/// Λ̄ tabulated from `n_steps`-step Adams solves out to the critical moments.
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_cgf_table_new(model: *const RhModel, n_steps: usize, out: *mut *mut RhCgf) -> RhStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let cgf = LambdaTable::build(&m.params, n_steps).map_err(fail)?;
        write(out, Box::into_raw(Box::new(RhCgf { inner: Box::new(cgf) })), "out")
    })
}

/// # Safety
/// `cgf` must be NULL or a handle from an `rh_cgf_*_new` function not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rh_cgf_free(cgf: *mut RhCgf) {
    if !cgf.is_null() {
        drop(Box::from_raw(cgf));
    }
}

/// Λ̄(p) (+∞ outside the domain).
///
/// # Safety
/// Pointers must be valid; `cgf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_cgf_eval(cgf: *const RhCgf, p: f64, value: *mut f64) -> RhStatus {
    guard(|| {
        let c = as_ref(cgf, "cgf")?;
        write(value, c.inner.lambda_bar(p), "value")
    })
}

/// Endpoints (p₋, p₊) of the domain of Λ̄.
///
/// # Safety
/// Pointers must be valid; `cgf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_cgf_domain(cgf: *const RhCgf, p_minus: *mut f64, p_plus: *mut f64) -> RhStatus {
    guard(|| {
        let c = as_ref(cgf, "cgf")?;
        write(p_minus, c.inner.p_minus(), "p_minus")?;
        write(p_plus, c.inner.p_plus(), "p_plus")
    })
}

/// Rate function I(x) = sup_p (px − Λ̄(p)) and its maximiser p*.
///
/// # Safety
/// Pointers must be valid; `cgf` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_rate_function(cgf: *const RhCgf, x: f64, rate: *mut f64, p_star: *mut f64) -> RhStatus {
    guard(|| {
        let c = as_ref(cgf, "cgf")?;
        let r = rate_function(c.inner.as_ref(), x);
        write(rate, r.rate, "rate")?;
        write(p_star, r.p_star, "p_star")
    })
}

/// Leading-order small-time implied volatility σ̂(x).
///
/// # Safety
/// Pointers must be valid; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn rh_smile_leading(cgf: *const RhCgf, model: *const RhModel, x: f64, vol: *mut f64) -> RhStatus {
    guard(|| {
        let c = as_ref(cgf, "cgf")?;
        let m = as_ref(model, "model")?;
        let v = asymptotic_smile(c.inner.as_ref(), &m.params, x).map_err(fail)?;
        write(vol, v, "vol")
    })
}

/// Higher-order implied volatility at scaled log-moneyness x and maturity t,
/// priced along the saddlepoint contour with the first correction.
///
/// # Safety
/// Pointers must be valid; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn rh_smile_higher_order(
    cgf: *const RhCgf,
    model: *const RhModel,
    x: f64,
    t: f64,
    vol: *mut f64,
) -> RhStatus {
    guard(|| {
        let c = as_ref(cgf, "cgf")?;
        let m = as_ref(model, "model")?;
        let r = saddle_contour_call(c.inner.as_ref(), &m.params, x, t, true).map_err(fail)?;
        write(vol, r.implied_vol, "vol")
    })
}

/// Call price E(e^{X_t} − e^k)⁺ by Lewis' formula with `n_points`
/// Gauss-Legendre nodes on [0, u_max] and `n_steps`-step Adams solves.
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_lewis_call(
    model: *const RhModel,
    k: f64,
    t: f64,
    n_steps: usize,
    n_points: usize,
    u_max: f64,
    price: *mut f64,
) -> RhStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let quad = QuadratureSpec::new(n_points, u_max).map_err(fail)?;
        let mgf = ExactMgf {
            params: m.params,
            t,
            n_steps,
        };
        let r = lewis_call(&mgf, k, &quad).map_err(fail)?;
        write(price, r.price, "price")
    })
}

/// Black-Scholes implied volatility of a call (`is_call` ≠ 0) or put price.
///
/// # Safety
/// `vol` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rh_implied_vol(price: f64, k: f64, t: f64, is_call: i32, vol: *mut f64) -> RhStatus {
    guard(|| {
        let quote = OptionQuote {
            price,
            log_strike: k,
            maturity: t,
            kind: if is_call != 0 {
                OptionKind::Call
            } else {
                OptionKind::Put
            },
        };
        let v = implied_vol(&quote).map_err(fail)?;
        write(vol, v, "vol")
    })
}

/// Large-time implied volatility σ∞(x) (requires λ > 0, ρ ≤ 0).
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_smile_large_time(model: *const RhModel, x: f64, vol: *mut f64) -> RhStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let v = smile_infinity(&m.params, x).map_err(fail)?;
        write(vol, v, "vol")
    })
}

/// H = 0 limit smile σ̂₀ at `n` points `xs` (requires α = ½), written to `vols`.
///
/// # Safety
/// `xs` and `vols` must be valid for `n` elements; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_smile_h0(
    model: *const RhModel,
    n_points: usize,
    u_max: f64,
    xs: *const f64,
    n: usize,
    vols: *mut f64,
) -> RhStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        if n > 0 && (xs.is_null() || vols.is_null()) {
            return Err(null("xs/vols"));
        }
        let quad = QuadratureSpec::new(n_points, u_max).map_err(fail)?;
        let pricer = EdgeworthPricer::new(&m.params, &quad).map_err(fail)?;
        let xs = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(xs, n)
        };
        let out: Vec<f64> = xs
            .iter()
            .map(|&x| pricer.smile(x))
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        if n > 0 {
            ptr::copy_nonoverlapping(out.as_ptr(), vols, n);
        }
        Ok(())
    })
}

/// Configuration from a named preset (`table`, `fig3`, `fig4`, `fig5`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rh_config_new(name: *const c_char, out: *mut *mut RhConfig) -> RhStatus {
    guard(|| {
        let name = as_str(name, "name")?;
        let inner = RunConfig::preset(name).map_err(fail)?;
        write(out, Box::into_raw(Box::new(RhConfig { inner })), "out")
    })
}

/// Apply `key = value` lines to a configuration.
///
/// # Safety
/// `config` must be a live handle; `text` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rh_config_apply(config: *mut RhConfig, text: *const c_char) -> RhStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or_else(|| null("config"))?;
        let text = as_str(text, "text")?;
        let mut next = cfg.inner.clone();
        next.apply_text(text).map_err(fail)?;
        cfg.inner = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle from [`rh_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rh_config_free(config: *mut RhConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run a command (`smile`, `rate`, `largetime`, `h0`, `mc`, `calibrate-theta`,
/// `calibrate-rho`) and return its table as CSV (`json` = 0) or JSON text in
/// `*output` (free with [`rh_string_free`]). `*failed_rows` receives the
/// number of rows that could not be computed.
///
/// # Safety
/// Pointers must be valid; `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_run(
    config: *const RhConfig,
    command: *const c_char,
    json: i32,
    output: *mut *mut c_char,
    failed_rows: *mut usize,
) -> RhStatus {
    guard(|| {
        let cfg = &as_ref(config, "config")?.inner;
        let command = as_str(command, "command")?;
        if output.is_null() || failed_rows.is_null() {
            return Err(null("output/failed_rows"));
        }
        let out = match command {
            "smile" => cmd_smile(cfg),
            "rate" => cmd_rate(cfg),
            "largetime" => cmd_largetime(cfg),
            "h0" => cmd_h0(cfg),
            "mc" => cmd_mc(cfg),
            "calibrate-theta" => cmd_calibrate_theta(cfg),
            "calibrate-rho" => cmd_calibrate_rho(cfg),
            other => Err(Error::Config {
                line: 0,
                reason: format!("unknown command `{other}`"),
            }),
        }
        .map_err(fail)?;
        let format = if json != 0 { Format::Json } else { Format::Csv };
        let mut buf = Vec::new();
        out.table.write(format, &mut buf).map_err(fail)?;
        let text = CString::new(buf).map_err(|_| fail(Error::Io("output contains a NUL byte".into())))?;
        write(output, text.into_raw(), "output")?;
        write(failed_rows, out.failed_rows, "failed_rows")
    })
}

/// Evaluate log E(e^{qX_t}) at complex q = re + i·im.
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rh_log_mgf_complex(
    model: *const RhModel,
    re: f64,
    im: f64,
    t: f64,
    n_steps: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RhStatus {
    guard(|| {
        let m = as_ref(model, "model")?;
        let r = log_mgf(&m.params, Complex64::new(re, im), t, n_steps).map_err(fail)?;
        if !r.finite {
            return Err(fail(Error::Domain(format!(
                "moment of order {re}+{im}i explodes before t = {t}"
            ))));
        }
        write(out_re, r.log_mgf.re, "out_re")?;
        write(out_im, r.log_mgf.im, "out_im")
    })
}
