//! C ABI for `sepdiag`.
//!
//! Problems and clouds are opaque handles released with their `_free`
//! function. Every fallible call returns a [`SepStatus`]; on failure the
//! message is available from [`sep_last_error_message`] on the same thread.
//! Strings returned through `char **` are released with [`sep_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sepdiag::analysis::{run_checker, CheckConfig, Property};
use sepdiag::cli::{diagnose_config, CliError};
use sepdiag::config::{ConfigError, ProblemConfig};
use sepdiag::sep::{approx_solution_set, eps_residual, ApproxSolutionSet, SepError, SplitProblem};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    InvalidArgument = 4,
    BudgetExceeded = 5,
    ComputationError = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A validated problem together with its configuration.
pub struct SepProblem {
    config: ProblemConfig,
    problem: SplitProblem,
}

/// A sampled approximate solution set.
pub struct SepCloud {
    set: ApproxSolutionSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

struct Failure(SepStatus, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure(SepStatus::ConfigError, e.to_string())
    }
}

impl From<SepError> for Failure {
    fn from(e: SepError) -> Self {
        Failure::from(CliError::Sep(e))
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e.exit_code() {
            2 if matches!(e, CliError::Config(_)) => SepStatus::ConfigError,
            2 => SepStatus::InvalidArgument,
            3 => SepStatus::BudgetExceeded,
            _ => SepStatus::ComputationError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SepStatus::NullPointer, format!("{what} is null"))
}

/// Runs `body`, turning errors and panics into a status and a stored message.
fn guard<F>(body: F) -> SepStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SepStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            SepStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| Failure(SepStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| null(what))
}

fn new_problem(config: ProblemConfig) -> Result<*mut SepProblem, Failure> {
    let problem = config.build()?;
    Ok(Box::into_raw(Box::new(SepProblem { config, problem })))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(SepStatus::ComputationError, "output contains a nul byte".into()))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Parses and validates a JSON problem configuration.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sep_problem_from_json(json: *const c_char, out: *mut *mut SepProblem) -> SepStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let config = ProblemConfig::from_json(text(json, "json")?)?;
        *out = new_problem(config)?;
        Ok(())
    })
}

/// Loads `builtin:example1`, `builtin:example2` or `builtin:example3`.
///
/// # Safety
/// `name` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sep_problem_builtin(name: *const c_char, out: *mut *mut SepProblem) -> SepStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let config = ProblemConfig::builtin(text(name, "name")?)?;
        *out = new_problem(config)?;
        Ok(())
    })
}

/// Releases a problem; null is ignored.
///
/// # Safety
/// `problem` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sep_problem_free(problem: *mut SepProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Dimensions of `C` and `Q`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sep_problem_dims(problem: *const SepProblem, n: *mut usize, m: *mut usize) -> SepStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let (dn, dm) = p.problem.dims();
        *out_ptr(n, "n")? = dn;
        *out_ptr(m, "m")? = dm;
        Ok(())
    })
}

/// Residual of `(x, y)`, the least `ε` for which it is an `ε`-solution on
/// the problem's inner grid.
///
/// # Safety
/// `x` must hold `n` doubles, `y` must hold `m`, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sep_eps_residual(
    problem: *const SepProblem,
    x: *const f64,
    n: usize,
    y: *const f64,
    m: usize,
    out: *mut f64,
) -> SepStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        let value = eps_residual(&p.problem, slice(x, n, "x")?, slice(y, m, "y")?)?;
        *out_ptr(out, "out")? = value;
        Ok(())
    })
}

/// Samples `S(epsilon)` on the problem's grids.
///
/// # Safety
/// `problem` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sep_approx_solution_set(
    problem: *const SepProblem,
    epsilon: f64,
    out: *mut *mut SepCloud,
) -> SepStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let p = handle(problem, "problem")?;
        let grids = p.config.grids;
        let set = approx_solution_set(&p.problem, epsilon, grids.h_out, grids.h_in)?;
        *out = Box::into_raw(Box::new(SepCloud { set }));
        Ok(())
    })
}

/// Number of points; 0 for null.
///
/// # Safety
/// `cloud` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn sep_cloud_len(cloud: *const SepCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.set.cloud.len())
}

/// Coordinates per point (`n + m`); 0 for null.
///
/// # Safety
/// `cloud` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn sep_cloud_dim(cloud: *const SepCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.set.cloud.dim())
}

/// The threshold the cloud was computed for, after flooring.
///
/// # Safety
/// `cloud` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn sep_cloud_epsilon(cloud: *const SepCloud) -> f64 {
    cloud.as_ref().map_or(f64::NAN, |c| c.set.epsilon)
}

/// Copies the points row-major into `buffer`, which must hold
/// `len * dim` doubles.
///
/// # Safety
/// `buffer` must be writable for `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sep_cloud_points(cloud: *const SepCloud, buffer: *mut f64, capacity: usize) -> SepStatus {
    guard(|| {
        let c = &handle(cloud, "cloud")?.set.cloud;
        let needed = c.len() * c.dim();
        if capacity < needed {
            return Err(Failure(
                SepStatus::BufferTooSmall,
                format!("buffer holds {capacity} doubles, {needed} needed"),
            ));
        }
        if needed == 0 {
            return Ok(());
        }
        if buffer.is_null() {
            return Err(null("buffer"));
        }
        let dst = std::slice::from_raw_parts_mut(buffer, needed);
        for (row, p) in dst.chunks_exact_mut(c.dim()).zip(c.iter()) {
            row.copy_from_slice(p);
        }
        Ok(())
    })
}

/// Releases a cloud; null is ignored.
///
/// # Safety
/// `cloud` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sep_cloud_free(cloud: *mut SepCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Runs the full diagnosis and returns the report as JSON.
///
/// # Safety
/// `problem` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sep_diagnose_json(problem: *const SepProblem, out: *mut *mut c_char) -> SepStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let p = handle(problem, "problem")?;
        let report = diagnose_config(&p.config)?;
        *out = into_c_string(report.to_json().to_string())?;
        Ok(())
    })
}

/// Runs one property checker (or `all`) on `f` and `g` and returns the
/// reports as a JSON array.
///
/// # Safety
/// `problem`, `property` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sep_check_json(
    problem: *const SepProblem,
    property: *const c_char,
    out: *mut *mut c_char,
) -> SepStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let p = handle(problem, "problem")?;
        let name = text(property, "property")?;
        let properties = match name {
            "all" => Property::ALL.to_vec(),
            other => vec![Property::from_name(other)
                .ok_or_else(|| Failure(SepStatus::InvalidArgument, format!("unknown property `{other}`")))?],
        };
        let cfg = CheckConfig::with_seed(p.config.seed);
        let mut reports = Vec::new();
        for prop in properties {
            for (subject, expr, set) in [("f", p.problem.f(), p.problem.c()), ("g", p.problem.g(), p.problem.q())] {
                reports
                    .push(run_checker(prop, subject, expr, set, &cfg).map_err(|e| Failure::from(CliError::from(e)))?);
            }
        }
        *out = into_c_string(serde_json::to_string(&reports).expect("reports serialize"))?;
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
