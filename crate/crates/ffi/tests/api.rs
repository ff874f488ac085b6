use std::ffi::CStr;
use std::ptr;

use skewdim_ffi::*;

fn last_error() -> String {
    let p = skewdim_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(a: f64, c: f64) -> *mut SkewdimModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { skewdim_model_new(a, c, &mut m) }, SkewdimStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn invalid_models_report_config_errors() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { skewdim_model_new(1.5, 1.001, &mut m) }, SkewdimStatus::Config);
    assert!(m.is_null());
    assert!(last_error().contains("a = 1.5"));
    assert_eq!(unsafe { skewdim_model_new(0.45, 0.9, &mut m) }, SkewdimStatus::Config);
    assert_eq!(unsafe { skewdim_model_new(0.45, 1.001, ptr::null_mut()) }, SkewdimStatus::NullArgument);
    assert!(last_error().contains("model_out"));
    unsafe { skewdim_model_free(ptr::null_mut()) };
    let ok = model(0.45, 1.001);
    assert!(skewdim_last_error().is_null(), "success clears the message");
    assert_eq!(unsafe { skewdim_model_configure(ok, 1e-10, 1e-9, 7) }, SkewdimStatus::Config);
    assert_eq!(unsafe { skewdim_model_configure(ok, -1.0, 1e-9, 0) }, SkewdimStatus::Config);
    unsafe { skewdim_model_free(ok) };
}

#[test]
fn gamma_and_pressure() {
    let m = model(0.45, 1.001);
    let mut g = SkewdimGamma::default();
    assert_eq!(unsafe { skewdim_gamma(m, 12, &mut g) }, SkewdimStatus::Ok);
    assert!((g.gamma_max_est - 2.001f64.ln()).abs() < 1e-9 && g.witness_max_len == 1);
    assert!(g.gamma_min_est < g.gamma_c && g.gamma_c < g.gamma_max_est);
    assert_eq!(unsafe { skewdim_gamma(m, 60, &mut g) }, SkewdimStatus::Resource);

    let mut p = SkewdimPressure::default();
    assert_eq!(unsafe { skewdim_pressure_window(m, 8, 0.0, 2.0, 0.3, &mut p) }, SkewdimStatus::Ok);
    assert!((p.value - 0.505f64.ln()).abs() < 1e-12 && p.resolution == 8);
    assert_eq!(unsafe { skewdim_pressure(m, 1.0, 0.5, -0.3, &mut p) }, SkewdimStatus::Ok);
    let mut w = SkewdimPressure::default();
    assert_eq!(unsafe { skewdim_pressure_window(m, 14, 1.0, 0.5, -0.3, &mut w) }, SkewdimStatus::Ok);
    assert!((p.value - w.value).abs() <= w.est_error);
    assert_eq!(unsafe { skewdim_pressure(m, 1.0, 0.5, -0.3, ptr::null_mut()) }, SkewdimStatus::NullArgument);
    assert_eq!(unsafe { skewdim_pressure(ptr::null(), 1.0, 0.5, -0.3, &mut p) }, SkewdimStatus::NullArgument);
    unsafe { skewdim_model_free(m) };
}

#[test]
fn solve_and_trace() {
    let m = model(0.45, 1.001);
    let mut g = SkewdimGamma::default();
    unsafe { skewdim_gamma(m, 4, &mut g) };
    let mut pt = SkewdimPoint::default();
    assert_eq!(unsafe { skewdim_solve(m, g.gamma_c, 1.05, 0.1, &mut pt) }, SkewdimStatus::Ok);
    assert!(pt.converged && (pt.d - 1.0).abs() < 1e-6 && pt.q.abs() < 1e-6);

    let grid: Vec<f64> = (0..9).map(|i| g.gamma_c - 0.4 + 0.1 * i as f64).collect();
    let mut curve = ptr::null_mut();
    assert_eq!(unsafe { skewdim_trace(m, grid.as_ptr(), grid.len() as u64, &mut curve) }, SkewdimStatus::Ok);
    assert_eq!(unsafe { skewdim_curve_len(curve) }, 9);
    let points: Vec<SkewdimPoint> = (0..9)
        .map(|i| {
            let mut p = SkewdimPoint::default();
            assert_eq!(unsafe { skewdim_curve_point(curve, i, &mut p) }, SkewdimStatus::Ok);
            p
        })
        .collect();
    assert!(points.iter().all(|p| p.converged && p.d <= 1.0));
    assert!(points[..4].windows(2).all(|w| w[0].d < w[1].d));
    assert!(points[5..].windows(2).all(|w| w[0].d > w[1].d));
    assert_eq!(unsafe { skewdim_curve_point(curve, 9, &mut pt) }, SkewdimStatus::Config);
    assert_eq!(unsafe { skewdim_trace(m, ptr::null(), 3, &mut curve) }, SkewdimStatus::NullArgument);
    assert_eq!(unsafe { skewdim_curve_len(ptr::null()) }, 0);
    unsafe { skewdim_curve_free(curve) };
    unsafe { skewdim_model_free(m) };
}

#[test]
fn zeroset_counts_add_up() {
    let m = model(0.45, 1.001);
    let mut z = SkewdimZeroSet::default();
    assert_eq!(unsafe { skewdim_zeroset(m, -0.75, 200, 3000, 0, &mut z) }, SkewdimStatus::Ok);
    assert_eq!(z.zero + z.positive + z.undetermined, 200);
    assert!(z.fraction_zero <= 0.1);
    assert_eq!(unsafe { skewdim_zeroset(m, -0.75, 0, 3000, 0, &mut z) }, SkewdimStatus::Config);
    unsafe { skewdim_model_free(m) };
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(skewdim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
