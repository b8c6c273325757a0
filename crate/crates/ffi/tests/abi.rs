use std::ffi::{CStr, CString};
use std::ptr;

use facmech_ffi::*;

fn last_error() -> String {
    let p = fm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn profile(coords: &[f64], dim: usize, metric: FmMetric) -> *mut FmProfile {
    let mut out = ptr::null_mut();
    let st = unsafe { fm_profile_new(coords.as_ptr(), coords.len() / dim, dim, metric, &mut out) };
    assert_eq!(st, FmStatus::Ok);
    out
}

#[test]
fn median_round_trip() {
    let p = profile(&[0.0, 0.0, 4.0, 1.0, 2.0, 5.0], 2, FmMetric::Manhattan);
    assert_eq!(unsafe { fm_profile_len(p) }, 3);
    let desc = CString::new(r#"{"kind":"multi_dim_median"}"#).unwrap();
    let mut sol = ptr::null_mut();
    let st = unsafe { fm_run_mechanism(p, desc.as_ptr(), 1, ptr::null(), &mut sol) };
    assert_eq!(st, FmStatus::Ok);
    assert!(fm_last_error().is_null());
    assert_eq!(unsafe { fm_solution_facility_count(sol) }, 1);

    let mut loc = [0.0; 2];
    assert_eq!(
        unsafe { fm_solution_locations(sol, loc.as_mut_ptr(), 2) },
        FmStatus::Ok
    );
    assert_eq!(loc, [2.0, 1.0]);
    let mut assign = [9usize; 3];
    assert_eq!(
        unsafe { fm_solution_assignment(sol, assign.as_mut_ptr(), 3) },
        FmStatus::Ok
    );
    assert_eq!(assign, [0, 0, 0]);

    let mut total = 0.0;
    assert_eq!(
        unsafe { fm_evaluate(p, sol, FmObjective::Total, &mut total) },
        FmStatus::Ok
    );
    let mut best = 0.0;
    let st = unsafe { fm_optimal_welfare(p, 1, FmObjective::Total, &mut best, ptr::null_mut()) };
    assert_eq!(st, FmStatus::Ok);
    assert!((total - best).abs() < 1e-9);

    let mut small = [0.0; 1];
    assert_eq!(
        unsafe { fm_solution_locations(sol, small.as_mut_ptr(), 1) },
        FmStatus::InvalidInput
    );
    assert!(last_error().contains("buffer"));
    unsafe {
        fm_solution_free(sol);
        fm_profile_free(p);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut out = ptr::null_mut();
    let st = unsafe { fm_profile_new(ptr::null(), 2, 2, FmMetric::Euclidean, &mut out) };
    assert_eq!(st, FmStatus::NullPointer);
    assert!(last_error().contains("coords"));

    let nan = [f64::NAN, 0.0];
    let st = unsafe { fm_profile_new(nan.as_ptr(), 1, 2, FmMetric::Euclidean, &mut out) };
    assert_eq!(st, FmStatus::InvalidInput);

    let p = profile(&[0.0, 0.0, 1.0, 1.0], 2, FmMetric::Euclidean);
    let bad = CString::new(r#"{"kind":"nope"}"#).unwrap();
    let mut sol = ptr::null_mut();
    let st = unsafe { fm_run_mechanism(p, bad.as_ptr(), 1, ptr::null(), &mut sol) };
    assert_eq!(st, FmStatus::InvalidInput);
    assert!(sol.is_null());

    let name = CString::new("no_such_scenario").unwrap();
    let mut passed = false;
    let st = unsafe { fm_run_scenario(name.as_ptr(), &mut passed, ptr::null_mut()) };
    assert_eq!(st, FmStatus::UnknownScenario);
    unsafe { fm_profile_free(p) };
    unsafe { fm_profile_free(ptr::null_mut()) };
}

#[test]
fn capacitated_run() {
    let p = profile(
        &[0.0, 0.0, 1.0, 0.0, 10.0, 0.0, 11.0, 0.0],
        2,
        FmMetric::Euclidean,
    );
    let desc = CString::new(r#"{"kind":"serial_dictatorship"}"#).unwrap();
    let caps = [2usize, 2];
    let mut sol = ptr::null_mut();
    let st = unsafe { fm_run_mechanism(p, desc.as_ptr(), 2, caps.as_ptr(), &mut sol) };
    assert_eq!(st, FmStatus::Ok);
    let mut assign = [0usize; 4];
    assert_eq!(
        unsafe { fm_solution_assignment(sol, assign.as_mut_ptr(), 4) },
        FmStatus::Ok
    );
    for f in 0..2 {
        assert_eq!(assign.iter().filter(|&&a| a == f).count(), 2);
    }
    unsafe {
        fm_solution_free(sol);
        fm_profile_free(p);
    }
}

#[test]
fn geometry_helpers() {
    let pts = [0.0, 0.0, 2.0, 0.0, 1.0, 3.0];
    let mut c = [0.0; 2];
    let mut r = 0.0;
    let st = unsafe { fm_smallest_enclosing_circle(pts.as_ptr(), 3, 2, c.as_mut_ptr(), &mut r) };
    assert_eq!(st, FmStatus::Ok);
    for p in pts.chunks(2) {
        assert!(((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() <= r + 1e-9);
    }

    let sq = [0.0, 0.0, 2.0, 0.0, 2.0, 2.0, 0.0, 2.0];
    let mut gm = [0.0; 2];
    let st = unsafe { fm_geometric_median(sq.as_ptr(), 4, 2, 1e-9, gm.as_mut_ptr()) };
    assert_eq!(st, FmStatus::Ok);
    assert!((gm[0] - 1.0).abs() < 1e-6 && (gm[1] - 1.0).abs() < 1e-6);
}

#[test]
fn manipulation_certificate_verifies() {
    let p = profile(
        &[0.0, 0.0, 0.0, 2.0, 12.0, 0.0, 12.0, 2.0],
        2,
        FmMetric::Euclidean,
    );
    let desc = CString::new(r#"{"kind":"geometric_median"}"#).unwrap();
    let mut json = ptr::null_mut();
    let st = unsafe { fm_check_strategy_proofness(p, desc.as_ptr(), 1, 0.5, &mut json) };
    assert_eq!(st, FmStatus::Ok);
    assert!(!json.is_null());
    let mut ok = false;
    assert_eq!(
        unsafe { fm_verify_certificate(json, &mut ok) },
        FmStatus::Ok
    );
    assert!(ok);

    let median = CString::new(r#"{"kind":"multi_dim_median"}"#).unwrap();
    let manhattan = profile(&[0.0, 0.0, 4.0, 1.0, 2.0, 5.0], 2, FmMetric::Manhattan);
    let mut none = ptr::null_mut();
    let st = unsafe { fm_check_strategy_proofness(manhattan, median.as_ptr(), 1, 0.5, &mut none) };
    assert_eq!(st, FmStatus::Ok);
    assert!(none.is_null());
    unsafe {
        fm_string_free(json);
        fm_profile_free(p);
        fm_profile_free(manhattan);
    }
}

#[test]
fn scenario_report_json() {
    let name = CString::new("capacitated_even").unwrap();
    let mut passed = false;
    let mut json = ptr::null_mut();
    let st = unsafe { fm_run_scenario(name.as_ptr(), &mut passed, &mut json) };
    assert_eq!(st, FmStatus::Ok);
    assert!(passed);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["name"], "capacitated_even");
    unsafe { fm_string_free(json) };
}
