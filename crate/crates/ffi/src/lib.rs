//! C ABI over `cointegra`.
//!
//! Every function returns a status code (`CG_OK` on success) and writes
//! results through out-pointers. After a failure the message is available
//! from `cg_last_error_message` on the same thread until the next call.
//! Strings handed out by this library must be released with
//! `cg_string_free`; datasets with `cg_dataset_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cointegra::config::PipelineConfig;
use cointegra::dols::{dols_fit, DolsSpec};
use cointegra::johansen::{johansen_eigen, DetCase, VecmSpec};
use cointegra::pipeline::run_pipeline_from_dir;
use cointegra::significance::{CriticalValues, Level};
use cointegra::unitroot::{adf_test, pp_test, BandwidthPolicy, DeterministicSpec, LagPolicy};
use cointegra::zabreak::{za_test, ZaModel};
use cointegra::{Dataset, Error, TimeSeries};

pub const CG_OK: c_int = 0;
pub const CG_ERR_CONFIG: c_int = 2;
pub const CG_ERR_DATA: c_int = 3;
pub const CG_ERR_NUMERICAL: c_int = 4;
pub const CG_ERR_NULL_POINTER: c_int = 10;
pub const CG_ERR_INVALID_ARG: c_int = 11;
pub const CG_ERR_PANIC: c_int = 12;

/// Opaque set of aligned annual series.
pub struct CgDataset {
    inner: Dataset,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CgCriticalValues {
    pub pct1: f64,
    pub pct5: f64,
    pub pct10: f64,
}

/// ADF or PP outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CgUnitRootResult {
    pub statistic: f64,
    /// ADF: augmentation lags; PP: Bartlett bandwidth.
    pub lags_or_bandwidth: usize,
    pub n_obs: usize,
    pub critical_values: CgCriticalValues,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CgZaResult {
    pub statistic: f64,
    /// First year after the break.
    pub break_year: i32,
    pub lags: usize,
    pub critical_values: CgCriticalValues,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(c_int, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.exit_code(), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CG_ERR_NULL_POINTER, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CG_ERR_INVALID_ARG, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> c_int {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CG_OK,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            CG_ERR_PANIC
        }
    }
}

unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn dataset<'a>(p: *const CgDataset) -> Result<&'a Dataset, Failure> {
    p.as_ref().map(|d| &d.inner).ok_or_else(|| null("dataset"))
}

unsafe fn series<'a>(ds: *const CgDataset, name: *const c_char) -> Result<&'a TimeSeries, Failure> {
    let d = dataset(ds)?;
    Ok(d.get(cstr(name, "series name")?)?)
}

fn det_spec(spec: c_int) -> Result<DeterministicSpec, Failure> {
    match spec {
        0 => Ok(DeterministicSpec::None),
        1 => Ok(DeterministicSpec::Constant),
        2 => Ok(DeterministicSpec::ConstantTrend),
        _ => Err(invalid(format!(
            "deterministic spec must be 0, 1 or 2, got {spec}"
        ))),
    }
}

fn lag_policy(lags: c_int) -> LagPolicy {
    if lags < 0 {
        LagPolicy::default()
    } else {
        LagPolicy::Fixed {
            lags: lags as usize,
        }
    }
}

fn bandwidth_policy(bw: c_int) -> BandwidthPolicy {
    if bw < 0 {
        BandwidthPolicy::Automatic
    } else {
        BandwidthPolicy::Fixed {
            bandwidth: bw as usize,
        }
    }
}

fn det_case(case: c_int) -> Result<DetCase, Failure> {
    let n = u8::try_from(case).map_err(|_| invalid(format!("deterministic case {case}")))?;
    Ok(DetCase::from_number(n)?)
}

fn cvs(c: &CriticalValues) -> CgCriticalValues {
    CgCriticalValues {
        pct1: c.pct1,
        pct5: c.pct5,
        pct10: c.pct10,
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("output contains a NUL byte"))
}

/// Build a dataset from `n_vars` series of `n_obs` values each, stored one
/// series after another in `values`, starting in `start_year`.
///
/// # Safety
/// `names` must hold `n_vars` NUL-terminated strings and `values`
/// `n_vars * n_obs` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cg_dataset_new(
    names: *const *const c_char,
    values: *const f64,
    n_vars: usize,
    n_obs: usize,
    start_year: i32,
    out: *mut *mut CgDataset,
) -> c_int {
    guard(|| {
        if names.is_null() || values.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        if n_vars == 0 || n_obs == 0 {
            return Err(invalid(
                "dataset needs at least one series and one observation",
            ));
        }
        let total = n_vars
            .checked_mul(n_obs)
            .ok_or_else(|| invalid("dataset too large"))?;
        let vals = std::slice::from_raw_parts(values, total);
        let names = std::slice::from_raw_parts(names, n_vars);
        let mut list = Vec::with_capacity(n_vars);
        for (j, &n) in names.iter().enumerate() {
            let name = cstr(n, "series name")?;
            list.push(TimeSeries::new(
                name,
                start_year,
                vals[j * n_obs..(j + 1) * n_obs].to_vec(),
            )?);
        }
        let d = Dataset::new(list)?;
        *out = Box::into_raw(Box::new(CgDataset { inner: d }));
        Ok(())
    })
}

/// # Safety
/// `ds` must come from `cg_dataset_new` and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn cg_dataset_free(ds: *mut CgDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Augmented Dickey-Fuller test. `spec`: 0 none, 1 constant, 2 constant and
/// trend. `lags < 0` selects the lag by SC up to the Schwert maximum.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_adf(
    ds: *const CgDataset,
    name: *const c_char,
    spec: c_int,
    lags: c_int,
    out: *mut CgUnitRootResult,
) -> c_int {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = adf_test(series(ds, name)?, det_spec(spec)?, lag_policy(lags))?;
        *out = CgUnitRootResult {
            statistic: r.statistic,
            lags_or_bandwidth: r.lags_or_bandwidth,
            n_obs: r.n_obs,
            critical_values: cvs(&r.critical_values),
        };
        Ok(())
    })
}

/// Phillips-Perron Z(t). `bandwidth < 0` uses the automatic Newey-West rule.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_pp(
    ds: *const CgDataset,
    name: *const c_char,
    spec: c_int,
    bandwidth: c_int,
    out: *mut CgUnitRootResult,
) -> c_int {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = pp_test(
            series(ds, name)?,
            det_spec(spec)?,
            bandwidth_policy(bandwidth),
        )?;
        *out = CgUnitRootResult {
            statistic: r.statistic,
            lags_or_bandwidth: r.lags_or_bandwidth,
            n_obs: r.n_obs,
            critical_values: cvs(&r.critical_values),
        };
        Ok(())
    })
}

/// Zivot-Andrews test. `model` is 'A', 'B' or 'C'.
///
/// # Safety
/// Pointers must be valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_za(
    ds: *const CgDataset,
    name: *const c_char,
    model: c_char,
    trimming: f64,
    lags: c_int,
    out: *mut CgZaResult,
) -> c_int {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let model = match model as u8 {
            b'A' | b'a' => ZaModel::A,
            b'B' | b'b' => ZaModel::B,
            b'C' | b'c' => ZaModel::C,
            _ => return Err(invalid("model must be 'A', 'B' or 'C'")),
        };
        let r = za_test(series(ds, name)?, model, trimming, lag_policy(lags))?;
        *out = CgZaResult {
            statistic: r.min_statistic,
            break_year: r.break_year,
            lags: r.lags,
            critical_values: cvs(&r.critical_values),
        };
        Ok(())
    })
}

/// Johansen eigenvalues, descending, for all series of `ds`. Writes at most
/// `capacity` values to `out` and the number of variables to `out_len`;
/// fails with `CG_ERR_INVALID_ARG` if `capacity` is too small.
///
/// # Safety
/// `out` must hold `capacity` doubles; `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_johansen_eigenvalues(
    ds: *const CgDataset,
    diff_lags: usize,
    det_case_number: c_int,
    out: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> c_int {
    guard(|| {
        let len = out_len.as_mut().ok_or_else(|| null("out_len"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = VecmSpec {
            diff_lags,
            det_case: det_case(det_case_number)?,
        };
        let e = johansen_eigen(dataset(ds)?, spec)?;
        *len = e.eigenvalues.len();
        if capacity < e.eigenvalues.len() {
            return Err(invalid(format!(
                "need room for {} eigenvalues",
                e.eigenvalues.len()
            )));
        }
        std::slice::from_raw_parts_mut(out, e.eigenvalues.len()).copy_from_slice(&e.eigenvalues);
        Ok(())
    })
}

/// Cointegrating rank chosen by the sequential trace test at `alpha`
/// (0.01, 0.05 or 0.10).
///
/// # Safety
/// `out_rank` writable.
#[no_mangle]
pub unsafe extern "C" fn cg_johansen_rank(
    ds: *const CgDataset,
    diff_lags: usize,
    det_case_number: c_int,
    alpha: f64,
    out_rank: *mut usize,
) -> c_int {
    guard(|| {
        let out = out_rank.as_mut().ok_or_else(|| null("out_rank"))?;
        let spec = VecmSpec {
            diff_lags,
            det_case: det_case(det_case_number)?,
        };
        let level = Level::from_alpha(alpha)?;
        *out = johansen_eigen(dataset(ds)?, spec)?
            .rank_test(level)?
            .decided_rank;
        Ok(())
    })
}

/// DOLS long-run coefficients. `coefficients` and `std_errors` receive
/// `n_regressors + 1` values: the regressors in order, then the intercept.
/// `bandwidth < 0` picks the long-run variance bandwidth automatically.
///
/// # Safety
/// `regressors` must hold `n_regressors` strings; both outputs
/// `n_regressors + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn cg_dols(
    ds: *const CgDataset,
    dependent: *const c_char,
    regressors: *const *const c_char,
    n_regressors: usize,
    leads: usize,
    lags: usize,
    bandwidth: c_int,
    coefficients: *mut f64,
    std_errors: *mut f64,
) -> c_int {
    guard(|| {
        if regressors.is_null() || coefficients.is_null() || std_errors.is_null() {
            return Err(null("argument"));
        }
        let dep = cstr(dependent, "dependent")?;
        let regs = std::slice::from_raw_parts(regressors, n_regressors)
            .iter()
            .map(|&p| cstr(p, "regressor"))
            .collect::<Result<Vec<&str>, Failure>>()?;
        let spec = DolsSpec {
            leads,
            lags,
            bandwidth: bandwidth_policy(bandwidth),
        };
        let fit = dols_fit(dataset(ds)?, dep, &regs, spec)?;
        let b = std::slice::from_raw_parts_mut(coefficients, fit.longrun.len());
        let s = std::slice::from_raw_parts_mut(std_errors, fit.longrun.len());
        for (i, c) in fit.longrun.iter().enumerate() {
            b[i] = c.coefficient;
            s[i] = c.std_error;
        }
        Ok(())
    })
}

/// Run the full pipeline on the CSV files in `data_dir`. `config_toml` may
/// be null for the defaults. The JSON report goes to `*out`; free it with
/// `cg_string_free`.
///
/// # Safety
/// `data_dir` must be a valid string, `config_toml` null or a valid string.
#[no_mangle]
pub unsafe extern "C" fn cg_pipeline_json(
    data_dir: *const c_char,
    config_toml: *const c_char,
    out: *mut *mut c_char,
) -> c_int {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let dir = cstr(data_dir, "data_dir")?;
        let cfg = if config_toml.is_null() {
            PipelineConfig::default()
        } else {
            PipelineConfig::from_toml(cstr(config_toml, "config_toml")?)?
        };
        let report = run_pipeline_from_dir(&cfg, Path::new(dir))?;
        *out = into_c_string(report.to_json())?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be null.
#[no_mangle]
pub unsafe extern "C" fn cg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
