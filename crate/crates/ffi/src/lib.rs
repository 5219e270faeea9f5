//! C interface to `gridplan`.
//!
//! Cases, configurations, plans and solutions cross the boundary as opaque
//! handles that the caller releases with the matching `gp_*_free`. Every
//! fallible call returns a [`GpStatus`]; on failure the message is kept per
//! thread and read back with [`gp_last_error`]. Strings going in are
//! NUL-terminated UTF-8. Strings coming out are owned by the caller and
//! released with [`gp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gridplan::case_io::{load_case_hashed, load_config, load_plan, parse_plan, write_plan, RunConfig};
use gridplan::error::Error;
use gridplan::ip_tnep::ip_solve;
use gridplan::model::{Case, ExpansionPlan};
use gridplan::planners::{evaluate_for, run_planner, PlannerKind, PlannerSpec};
use gridplan::report::SolverReport;

/// Result of a call.
#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Config = 6,
    PlanMismatch = 7,
    Infeasible = 8,
    Numerical = 9,
    Panic = 10,
}

impl From<&Error> for GpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Io { .. } => GpStatus::Io,
            Error::Parse { .. } => GpStatus::Parse,
            Error::Validation(_) => GpStatus::Validation,
            Error::Config(_) => GpStatus::Config,
            Error::PlanMismatch(_) => GpStatus::PlanMismatch,
            Error::Infeasible(_) => GpStatus::Infeasible,
            Error::Numerical(_) => GpStatus::Numerical,
        }
    }
}

/// A parsed and validated study case.
pub struct GpCase {
    case: Case,
    hash: String,
}

/// Run configuration.
pub struct GpConfig {
    cfg: RunConfig,
}

/// Expansion plan tied to the case it was read against.
pub struct GpPlan {
    plan: ExpansionPlan,
}

/// Outcome of a search.
pub struct GpSolution {
    report: SolverReport,
    plan_csv: String,
}

/// Evaluation of a given plan.
#[repr(C)]
#[derive(Copy, Clone, Debug, Default)]
pub struct GpCost {
    /// Discounted cost in dollars, penalties excluded.
    pub total: f64,
    /// Objective the planner minimises: cost plus constraint penalty.
    pub objective: f64,
    /// 1 when no constraint is violated.
    pub feasible: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Run `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (GpStatus, String)>) -> GpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GpStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GpStatus::Panic
        }
    }
}

fn lib<T>(r: gridplan::Result<T>) -> Result<T, (GpStatus, String)> {
    r.map_err(|e| (GpStatus::from(&e), e.to_string()))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GpStatus, String)> {
    if p.is_null() {
        return Err((GpStatus::NullPointer, format!("{} is null", what)));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (GpStatus::InvalidUtf8, format!("{} is not UTF-8", what)))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (GpStatus, String)> {
    p.as_ref().ok_or_else(|| (GpStatus::NullPointer, format!("{} is null", what)))
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), (GpStatus, String)> {
    if out.is_null() {
        Err((GpStatus::NullPointer, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn planner_kind(name: &str) -> Result<PlannerKind, (GpStatus, String)> {
    lib(name.parse())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Load a case from a file path or bundled name.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gp_case_load(spec: *const c_char, out: *mut *mut GpCase) -> GpStatus {
    guard(|| {
        out_ptr(out)?;
        let spec = text(spec, "case spec")?;
        let (case, hash) = lib(load_case_hashed(spec))?;
        *out = Box::into_raw(Box::new(GpCase { case, hash }));
        Ok(())
    })
}

/// # Safety
/// `case` must come from [`gp_case_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_case_free(case: *mut GpCase) {
    if !case.is_null() {
        drop(Box::from_raw(case));
    }
}

/// Number of buses, or 0 for a null handle.
///
/// # Safety
/// `case` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_case_bus_count(case: *const GpCase) -> usize {
    case.as_ref().map_or(0, |c| c.case.buses.len())
}

/// SHA-256 of the case text as lowercase hex.
///
/// # Safety
/// `case` must be a live handle and `out` a writable pointer. Release the
/// string with [`gp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gp_case_hash(case: *const GpCase, out: *mut *mut c_char) -> GpStatus {
    guard(|| {
        out_ptr(out)?;
        let c = handle(case, "case")?;
        *out = CString::new(c.hash.clone()).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// Load a configuration from a file path or bundled name. A null `spec`
/// gives the defaults.
///
/// # Safety
/// `spec` must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gp_config_load(spec: *const c_char, out: *mut *mut GpConfig) -> GpStatus {
    guard(|| {
        out_ptr(out)?;
        let cfg = if spec.is_null() {
            RunConfig::default()
        } else {
            lib(load_config(text(spec, "config spec")?))?
        };
        *out = Box::into_raw(Box::new(GpConfig { cfg }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from [`gp_config_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_config_free(cfg: *mut GpConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Load a plan against `case`, padded to at least `min_stages` stages.
///
/// # Safety
/// Pointers must be live handles or NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_plan_load(
    case: *const GpCase,
    spec: *const c_char,
    min_stages: usize,
    out: *mut *mut GpPlan,
) -> GpStatus {
    guard(|| {
        out_ptr(out)?;
        let c = handle(case, "case")?;
        let plan = lib(load_plan(text(spec, "plan spec")?, &c.case, min_stages.max(1)))?;
        *out = Box::into_raw(Box::new(GpPlan { plan }));
        Ok(())
    })
}

/// Parse plan text (the plan file format) against `case`.
///
/// # Safety
/// Pointers must be live handles or NUL-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_plan_parse(
    case: *const GpCase,
    plan_text: *const c_char,
    min_stages: usize,
    out: *mut *mut GpPlan,
) -> GpStatus {
    guard(|| {
        out_ptr(out)?;
        let c = handle(case, "case")?;
        let plan = lib(parse_plan(text(plan_text, "plan text")?, &c.case, min_stages.max(1)))?;
        *out = Box::into_raw(Box::new(GpPlan { plan }));
        Ok(())
    })
}

/// # Safety
/// `plan` must come from [`gp_plan_load`] or [`gp_plan_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_plan_free(plan: *mut GpPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Cost and check `plan` as `planner` would. `n_minus_1` non-zero adds
/// the single-contingency checks where the planner has them.
///
/// # Safety
/// Handles must be live, `planner` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_evaluate(
    case: *const GpCase,
    cfg: *const GpConfig,
    plan: *const GpPlan,
    planner: *const c_char,
    n_minus_1: i32,
    out: *mut GpCost,
) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err((GpStatus::NullPointer, "output pointer is null".into()));
        }
        let c = handle(case, "case")?;
        let cfg = handle(cfg, "config")?;
        let p = handle(plan, "plan")?;
        let kind = planner_kind(text(planner, "planner")?)?;
        let o = lib(evaluate_for(kind, &c.case, &cfg.cfg, &p.plan, n_minus_1 != 0, None))?;
        *out = GpCost {
            total: o.cost.total(),
            objective: o.j,
            feasible: o.feasible() as i32,
        };
        Ok(())
    })
}

/// Search for a plan. `planner` is any planner name, or `ip-tnep` for the
/// interior-point solver (which ignores the seed). The same inputs and seed
/// always give the same solution.
///
/// # Safety
/// Handles must be live, `planner` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_solve(
    case: *const GpCase,
    cfg: *const GpConfig,
    planner: *const c_char,
    seed: u64,
    n_minus_1: i32,
    out: *mut *mut GpSolution,
) -> GpStatus {
    guard(|| {
        out_ptr(out)?;
        let c = handle(case, "case")?;
        let cfg = handle(cfg, "config")?;
        let name = text(planner, "planner")?;
        let report = if name.trim().eq_ignore_ascii_case("ip-tnep") {
            lib(ip_solve(&c.case, &cfg.cfg))?.report
        } else {
            let spec = lib(PlannerSpec::new(planner_kind(name)?, &cfg.cfg, n_minus_1 != 0))?;
            lib(run_planner(&spec, &c.case, &cfg.cfg, seed))?
        };
        let plan_csv = write_plan(&report.plan, &c.case);
        *out = Box::into_raw(Box::new(GpSolution { report, plan_csv }));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from [`gp_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gp_solution_free(sol: *mut GpSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Cost summary of a solution.
///
/// # Safety
/// `sol` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_solution_cost(sol: *const GpSolution, out: *mut GpCost) -> GpStatus {
    guard(|| {
        if out.is_null() {
            return Err((GpStatus::NullPointer, "output pointer is null".into()));
        }
        let s = handle(sol, "solution")?;
        *out = GpCost {
            total: s.report.total_cost(),
            objective: s.report.outcome.j,
            feasible: s.report.feasible() as i32,
        };
        Ok(())
    })
}

/// The solution's plan in the plan file format; the result can be written
/// read back with [`gp_plan_parse`].
///
/// # Safety
/// `sol` must be a live handle and `out` writable. Release the string with
/// [`gp_string_free`].
#[no_mangle]
pub unsafe extern "C" fn gp_solution_plan(sol: *const GpSolution, out: *mut *mut c_char) -> GpStatus {
    guard(|| {
        out_ptr(out)?;
        let s = handle(sol, "solution")?;
        *out = CString::new(s.plan_csv.clone()).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn gp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
