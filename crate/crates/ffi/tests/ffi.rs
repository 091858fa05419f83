use std::ffi::{CStr, CString};
use std::ptr;

use artbh_ffi::*;

fn last_error() -> String {
    let p = artbh_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn bathtub_horizon_round_trip() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(artbh_metric_bathtub(1.0, 0.5, 0.0, 0.0, &mut m), ArtbhStatus::Ok);
        assert_eq!(artbh_metric_dim(m), 2);

        let mut ergo = ptr::null_mut();
        assert_eq!(artbh_find_ergosphere(m, 0.02, &mut ergo), ArtbhStatus::Ok);
        let n = artbh_curve_len(ergo);
        let mut xy = vec![0.0; 2 * n];
        assert_eq!(artbh_curve_vertices(ergo, xy.as_mut_ptr(), xy.len()), ArtbhStatus::Ok);
        // ergosphere of the bathtub: r = sqrt(A² + B²)
        for p in xy.chunks(2) {
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.25f64.sqrt()).abs() < 1e-8);
        }

        let mut hz = ptr::null_mut();
        assert_eq!(artbh_find_horizon(m, ergo, &mut hz), ArtbhStatus::Ok);
        assert_eq!(artbh_horizon_kind(hz), -1);
        assert!((artbh_horizon_radius_mean(hz) - 1.0).abs() < 1e-6);
        assert!(artbh_horizon_residual(hz) < 1e-8);

        let mut js = ptr::null_mut();
        assert_eq!(artbh_horizon_json(hz, &mut js), ArtbhStatus::Ok);
        let text = CStr::from_ptr(js).to_str().unwrap();
        assert!(text.contains("\"kind\":\"white_hole\""));
        artbh_string_free(js);

        let mut hc = ptr::null_mut();
        assert_eq!(artbh_horizon_curve(hz, &mut hc), ArtbhStatus::Ok);
        assert!(artbh_curve_len(hc) > 100);

        artbh_curve_free(hc);
        artbh_horizon_free(hz);
        artbh_curve_free(ergo);
        artbh_metric_free(m);
    }
}

#[test]
fn sign_changing_b_has_no_horizon() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(artbh_metric_bathtub(1.0, 0.0, 0.5, 0.0, &mut m), ArtbhStatus::Ok);
        let mut ergo = ptr::null_mut();
        assert_eq!(artbh_find_ergosphere(m, 0.02, &mut ergo), ArtbhStatus::Ok);
        let mut hz = ptr::null_mut();
        assert_eq!(artbh_find_horizon(m, ergo, &mut hz), ArtbhStatus::NoHorizon);
        assert!(hz.is_null());
        assert!(last_error().contains("limit cycle"));
        artbh_curve_free(ergo);
        artbh_metric_free(m);
    }
}

#[test]
fn flat_metric_reports_precondition() {
    let toml = CString::new("[metric]\nfamily = \"flat\"\n").unwrap();
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(artbh_metric_from_toml(toml.as_ptr(), &mut m), ArtbhStatus::Ok);
        let mut ergo = ptr::null_mut();
        assert_eq!(artbh_find_ergosphere(m, 0.05, &mut ergo), ArtbhStatus::Precondition);
        assert!(last_error().contains("no zero set"));
        artbh_metric_free(m);
    }
}

#[test]
fn g_up_matches_minkowski_for_flat() {
    let toml = CString::new("[metric]\nfamily = \"flat\"\n").unwrap();
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(artbh_metric_from_toml(toml.as_ptr(), &mut m), ArtbhStatus::Ok);
        let x = [0.3, -0.2];
        let mut g = [0.0; 9];
        assert_eq!(artbh_metric_g_up(m, x.as_ptr(), 2, g.as_mut_ptr(), 9), ArtbhStatus::Ok);
        assert_eq!(g, [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]);
        let mut small = [0.0; 4];
        assert_eq!(
            artbh_metric_g_up(m, x.as_ptr(), 2, small.as_mut_ptr(), 4),
            ArtbhStatus::BufferTooSmall
        );
        assert_eq!(artbh_metric_g_up(m, x.as_ptr(), 3, g.as_mut_ptr(), 9), ArtbhStatus::Precondition);
        artbh_metric_free(m);
    }
}

#[test]
fn bad_inputs_are_reported_not_crashed() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(artbh_metric_bathtub(f64::NAN, 0.0, 0.0, 0.0, &mut m), ArtbhStatus::Precondition);
        assert_eq!(artbh_metric_bathtub(1.0, 0.0, 0.0, 0.0, ptr::null_mut()), ArtbhStatus::NullArgument);
        assert!(last_error().contains("out"));
        assert_eq!(artbh_metric_kerr_cyl(1.0, 2.0, &mut m), ArtbhStatus::Precondition);

        let bad = CString::new("[metric]\nfamily = \"bathtub\"\nA = 1.0\nbogus = 3\n").unwrap();
        assert_eq!(artbh_metric_from_toml(bad.as_ptr(), &mut m), ArtbhStatus::Precondition);
        let not_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(
            artbh_metric_from_toml(not_utf8.as_ptr() as *const _, &mut m),
            ArtbhStatus::InvalidUtf8
        );

        // null handles are tolerated by the accessors and destructors
        assert_eq!(artbh_metric_dim(ptr::null()), 0);
        assert_eq!(artbh_curve_len(ptr::null()), 0);
        assert_eq!(artbh_horizon_kind(ptr::null()), 0);
        assert!(artbh_horizon_radius_mean(ptr::null()).is_nan());
        artbh_metric_free(ptr::null_mut());
        artbh_curve_free(ptr::null_mut());
        artbh_horizon_free(ptr::null_mut());
        artbh_string_free(ptr::null_mut());
    }
}

#[test]
fn kerr_closed_forms_through_the_abi() {
    let (mut s, mut c, mut ok) = (0.0, 0.0, 0);
    let st = unsafe { artbh_kerr_verify(1.0, 0.6, 200, 0.02, &mut s, &mut c, &mut ok) };
    assert_eq!(st, ArtbhStatus::Ok);
    assert_eq!(ok, 1);
    assert!(s < 1e-10 && c < 1e-6);
}

#[test]
fn success_clears_the_last_error() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(artbh_metric_kerr_cyl(1.0, 2.0, &mut m), ArtbhStatus::Precondition);
        assert!(!artbh_last_error().is_null());
        assert_eq!(artbh_metric_kerr_cyl(1.0, 0.5, &mut m), ArtbhStatus::Ok);
        assert!(artbh_last_error().is_null());
        artbh_metric_free(m);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(artbh_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/artbh.h")).unwrap();
    for sym in [
        "ARTBH_H",
        "ARTBH_STATUS_NO_HORIZON",
        "typedef struct ArtbhMetric ArtbhMetric;",
        "artbh_metric_bathtub",
        "artbh_find_horizon",
        "artbh_last_error",
        "artbh_string_free",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
    // when a C compiler is around, the header must compile on its own
    let dir = tempfile_dir();
    let src = dir.join("check.c");
    std::fs::write(&src, "#include \"artbh.h\"\nint main(void) { return artbh_version() == 0; }\n").unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status();
    if let Ok(s) = status {
        assert!(s.success(), "header does not compile");
    }
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("artbh-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
