//! C ABI over `facmech`.
//!
//! Profiles and solutions are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`FmStatus`]; on failure
//! [`fm_last_error`] describes the problem. Strings returned through `char**`
//! out-parameters belong to the caller and are released with
//! [`fm_string_free`]. Mechanism descriptors and certificates cross the
//! boundary as JSON, in the same shape the `facmech` CLI prints.
//!
//! Coordinates are passed as flat row-major arrays: `n` points of `dim`
//! doubles each.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use facmech::axioms::{check_strategy_proofness, verify_certificate, Certificate, SearchBudget};
use facmech::geometry::{geometric_median, smallest_enclosing_circle, Metric, Point};
use facmech::mechanisms::{
    run_mechanism, AgentProfile, FacilitySpec, MechanismDescriptor, Solution,
};
use facmech::scenarios::run_scenario;
use facmech::welfare::{evaluate, optimal_welfare, WelfareObjective};
use facmech::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    InvalidInput = 1,
    /// An iteration hit its cap; outputs hold the best iterate.
    Convergence = 2,
    ResourceCap = 3,
    NullPointer = 4,
    UnknownScenario = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmMetric {
    Euclidean = 0,
    Manhattan = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmObjective {
    Total = 0,
    Max = 1,
}

impl From<FmMetric> for Metric {
    fn from(m: FmMetric) -> Self {
        match m {
            FmMetric::Euclidean => Metric::Euclidean,
            FmMetric::Manhattan => Metric::Manhattan,
        }
    }
}

impl From<FmObjective> for WelfareObjective {
    fn from(o: FmObjective) -> Self {
        match o {
            FmObjective::Total => WelfareObjective::Total,
            FmObjective::Max => WelfareObjective::Max,
        }
    }
}

/// Opaque agent profile.
pub struct FmProfile(AgentProfile);

/// Opaque facility locations plus assignment.
pub struct FmSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FmStatus {
    match err {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } => FmStatus::InvalidInput,
        Error::Convergence { .. } => FmStatus::Convergence,
        Error::ResourceCap { .. } => FmStatus::ResourceCap,
        Error::UnknownScenario(_) => FmStatus::UnknownScenario,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs `f`, records any error message and converts panics to a status.
fn guard(f: impl FnOnce() -> Outcome) -> FmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FmStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FmStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FmStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidInput(format!("{what} is not UTF-8"))))
}

unsafe fn points(coords: *const f64, n: usize, dim: usize) -> Result<Vec<Point>, Failure> {
    if coords.is_null() {
        return Err(Failure::Null("coords"));
    }
    if n == 0 || dim == 0 {
        return Err(Error::InvalidInput("need at least one point of dimension >= 1".into()).into());
    }
    let len = n
        .checked_mul(dim)
        .ok_or_else(|| Error::InvalidInput("coordinate count overflows".into()))?;
    let flat = std::slice::from_raw_parts(coords, len);
    Ok(flat
        .chunks(dim)
        .map(|c| Point::new(c.iter().copied()))
        .collect::<facmech::Result<Vec<_>>>()?)
}

unsafe fn spec(m: usize, capacities: *const usize) -> FacilitySpec {
    if capacities.is_null() {
        FacilitySpec::uncapacitated(m)
    } else {
        FacilitySpec::capacitated(std::slice::from_raw_parts(capacities, m).to_vec())
    }
}

fn descriptor(json: &str) -> Result<MechanismDescriptor, Failure> {
    serde_json::from_str(json)
        .map_err(|e| Failure::Lib(Error::InvalidInput(format!("mechanism descriptor: {e}"))))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no nul bytes").into_raw()
}

/// Message for the last failed call on this thread, or NULL after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a profile from `n` points of `dim` coordinates.
#[no_mangle]
pub unsafe extern "C" fn fm_profile_new(
    coords: *const f64,
    n: usize,
    dim: usize,
    metric: FmMetric,
    out: *mut *mut FmProfile,
) -> FmStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let profile = AgentProfile::new(points(coords, n, dim)?, metric.into())?;
        *out = Box::into_raw(Box::new(FmProfile(profile)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_profile_free(profile: *mut FmProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of agents, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_profile_len(profile: *const FmProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.len())
}

/// Runs the mechanism described by `descriptor_json`, for example
/// `{"kind":"multi_dim_median"}`. `capacities` may be NULL; otherwise it
/// holds `m` entries.
#[no_mangle]
pub unsafe extern "C" fn fm_run_mechanism(
    profile: *const FmProfile,
    descriptor_json: *const c_char,
    m: usize,
    capacities: *const usize,
    out: *mut *mut FmSolution,
) -> FmStatus {
    guard(|| {
        let profile = non_null(profile, "profile")?;
        let desc = descriptor(str_arg(descriptor_json, "descriptor_json")?)?;
        let out = out_ref(out, "out")?;
        let s = run_mechanism(&desc, &profile.0, &spec(m, capacities))?;
        *out = Box::into_raw(Box::new(FmSolution(s)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fm_solution_free(solution: *mut FmSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of facilities, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_solution_facility_count(solution: *const FmSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.locations.len())
}

/// Copies facility coordinates row-major into `out`, which holds `len`
/// doubles; `len` must be at least facilities times dimension.
#[no_mangle]
pub unsafe extern "C" fn fm_solution_locations(
    solution: *const FmSolution,
    out: *mut f64,
    len: usize,
) -> FmStatus {
    guard(|| {
        let s = non_null(solution, "solution")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let flat: Vec<f64> =
            s.0.locations
                .iter()
                .flat_map(|p| p.coords().to_vec())
                .collect();
        if len < flat.len() {
            return Err(Error::InvalidInput(format!(
                "buffer of {len} < {} coordinates",
                flat.len()
            ))
            .into());
        }
        std::slice::from_raw_parts_mut(out, flat.len()).copy_from_slice(&flat);
        Ok(())
    })
}

/// Copies the 0-based facility index of each agent into `out` (`len`
/// entries, at least the agent count).
#[no_mangle]
pub unsafe extern "C" fn fm_solution_assignment(
    solution: *const FmSolution,
    out: *mut usize,
    len: usize,
) -> FmStatus {
    guard(|| {
        let s = non_null(solution, "solution")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let a = &s.0.assignment;
        if len < a.len() {
            return Err(
                Error::InvalidInput(format!("buffer of {len} < {} agents", a.len())).into(),
            );
        }
        std::slice::from_raw_parts_mut(out, a.len()).copy_from_slice(a);
        Ok(())
    })
}

/// Total or maximum distance of agents to their assigned facilities.
#[no_mangle]
pub unsafe extern "C" fn fm_evaluate(
    profile: *const FmProfile,
    solution: *const FmSolution,
    objective: FmObjective,
    out: *mut f64,
) -> FmStatus {
    guard(|| {
        let p = non_null(profile, "profile")?;
        let s = non_null(solution, "solution")?;
        *out_ref(out, "out")? = evaluate(&p.0, &s.0, objective.into())?;
        Ok(())
    })
}

/// Exact optimal uncapacitated welfare. `out_solution` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_optimal_welfare(
    profile: *const FmProfile,
    m: usize,
    objective: FmObjective,
    out_value: *mut f64,
    out_solution: *mut *mut FmSolution,
) -> FmStatus {
    guard(|| {
        let p = non_null(profile, "profile")?;
        let value = out_ref(out_value, "out_value")?;
        let (w, s) = optimal_welfare(&p.0, &FacilitySpec::uncapacitated(m), objective.into())?;
        *value = w;
        if let Some(slot) = out_solution.as_mut() {
            *slot = Box::into_raw(Box::new(FmSolution(s)));
        }
        Ok(())
    })
}

/// Geometric median of `n` points. On `FM_STATUS_CONVERGENCE`, `out` still
/// receives the best iterate.
#[no_mangle]
pub unsafe extern "C" fn fm_geometric_median(
    coords: *const f64,
    n: usize,
    dim: usize,
    tolerance: f64,
    out: *mut f64,
) -> FmStatus {
    guard(|| {
        let pts = points(coords, n, dim)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let write =
            |p: &Point| std::slice::from_raw_parts_mut(out, dim).copy_from_slice(p.coords());
        match geometric_median(&pts, tolerance) {
            Ok(p) => {
                write(&p);
                Ok(())
            }
            Err(Error::Convergence { iterations, best }) => {
                write(&best);
                Err(Error::Convergence { iterations, best }.into())
            }
            Err(e) => Err(e.into()),
        }
    })
}

/// Smallest enclosing circle of points in one or two dimensions.
/// `center` receives `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn fm_smallest_enclosing_circle(
    coords: *const f64,
    n: usize,
    dim: usize,
    center: *mut f64,
    radius: *mut f64,
) -> FmStatus {
    guard(|| {
        let pts = points(coords, n, dim)?;
        if center.is_null() {
            return Err(Failure::Null("center"));
        }
        let r = out_ref(radius, "radius")?;
        let c = smallest_enclosing_circle(&pts)?;
        std::slice::from_raw_parts_mut(center, dim).copy_from_slice(c.center.coords());
        *r = c.radius;
        Ok(())
    })
}

/// Searches for a profitable misreport. `*out_json` receives the
/// certificate as JSON, or NULL when none was found.
#[no_mangle]
pub unsafe extern "C" fn fm_check_strategy_proofness(
    profile: *const FmProfile,
    descriptor_json: *const c_char,
    m: usize,
    grid_resolution: f64,
    out_json: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let p = non_null(profile, "profile")?;
        let desc = descriptor(str_arg(descriptor_json, "descriptor_json")?)?;
        let out = out_ref(out_json, "out_json")?;
        let budget = SearchBudget::with_resolution(grid_resolution);
        let cert = check_strategy_proofness(&desc, &p.0, &FacilitySpec::uncapacitated(m), &budget)?;
        *out = match cert {
            Some(c) => c_string(serde_json::to_string(&c).expect("certificate serializes")),
            None => ptr::null_mut(),
        };
        Ok(())
    })
}

/// Replays a certificate printed by the CLI or returned above.
#[no_mangle]
pub unsafe extern "C" fn fm_verify_certificate(
    certificate_json: *const c_char,
    out: *mut bool,
) -> FmStatus {
    guard(|| {
        let text = str_arg(certificate_json, "certificate_json")?;
        let out = out_ref(out, "out")?;
        let cert: Certificate = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("certificate: {e}")))?;
        *out = verify_certificate(&cert)?;
        Ok(())
    })
}

/// Runs a named scenario. `report_json` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn fm_run_scenario(
    name: *const c_char,
    passed: *mut bool,
    report_json: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let passed = out_ref(passed, "passed")?;
        let report = run_scenario(name)?;
        *passed = report.passed();
        if let Some(slot) = report_json.as_mut() {
            *slot = c_string(serde_json::to_string(&report).expect("report serializes"));
        }
        Ok(())
    })
}
