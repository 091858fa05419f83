use artbh_core::curve::{norm, ClosedCurve};
use artbh_core::ergosphere::*;
use artbh_core::metric::*;
use artbh_core::Error;

#[test]
fn bathtub_ergosphere_is_the_sonic_circle() {
    for (a, b) in [(1.0, 0.5), (1.0, 0.0), (-1.0, 1.0), (0.7, 0.2)] {
        let m = draining_bathtub(a, FourierB::constant(b));
        let ergo = find_ergosphere(&m, 0.05).unwrap();
        let want = (a * a + b * b as f64).sqrt();
        let err = ergo.vertices.iter().map(|v| (norm(*v) - want).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "A = {a}, B = {b}: radius error {err:e}");
        assert!(ergo.is_simple());
        assert!(ergo.normals_outward());
    }
}

#[test]
fn delta_and_g00_contours_coincide() {
    // Δ and covariant g₀₀ differ by the nonvanishing factor det g^{jk}
    let h = 0.05;
    let m = draining_bathtub(1.0, FourierB { b0: 0.4, b1: 0.2, c1: 0.1 });
    let lo = [m.bbox.lo[0], m.bbox.lo[1]];
    let hi = [m.bbox.hi[0], m.bbox.hi[1]];
    let d = extract_contour(&ScalarField2D::new(&m, FieldLabel::Delta), lo, hi, h).unwrap();
    let g = extract_contour(&ScalarField2D::new(&m, FieldLabel::G00), lo, hi, h).unwrap();
    let dist = d.outermost().unwrap().hausdorff(g.outermost().unwrap());
    assert!(dist < 2.0 * h, "Hausdorff distance {dist:e}");
}

#[test]
fn contour_of_known_field_is_polished() {
    struct Ellipse;
    impl PlanarField for Ellipse {
        fn value(&self, p: [f64; 2]) -> Option<f64> {
            Some(p[0] * p[0] / 4.0 + p[1] * p[1] - 1.0)
        }
    }
    let set = extract_contour(&Ellipse, [-3.0, -2.0], [3.0, 2.0], 0.1).unwrap();
    assert_eq!(set.closed.len(), 1);
    let c = &set.closed[0];
    let worst = c
        .vertices
        .iter()
        .map(|p| (p[0] * p[0] / 4.0 + p[1] * p[1] - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "residual {worst:e}");
    assert!((c.signed_area() - 2.0 * std::f64::consts::PI).abs() < 5e-3);
}

#[test]
fn flat_metric_has_no_ergosphere() {
    let m = flat(2);
    assert!(matches!(find_ergosphere(&m, 0.1), Err(Error::NoZeroSet)));
}

#[test]
fn kerr_delta1_vanishes_on_outer_horizon_only() {
    let (m, a) = (1.0, 0.6);
    let (rp, rm) = kerr_horizon_radii(m, a).unwrap();
    assert!((rp - 1.8).abs() < 1e-15 && (rm - 0.2).abs() < 1e-15);
    let cyl = kerr_cylindrical(m, a).unwrap();
    for th in [0.3, 1.0, 1.5, 2.4] {
        let p = kerr_surface_point(1.8, a, th);
        assert!(restricted_delta1(&cyl, p[0], p[1]).unwrap().abs() < 1e-10);
        let q = kerr_surface_point(1.0, a, th);
        let d1 = restricted_delta1(&cyl, q[0], q[1]).unwrap();
        assert!((d1 - kerr_delta1_closed(m, a, 1.0)).abs() < 1e-12);
        assert!(d1 < -0.1);
    }
}

#[test]
fn kerr_outer_ergosphere_is_a_delta_zero_set_on_the_meridian() {
    let (m, a) = (1.0, 0.6);
    let ks = kerr_kerr_schild(m, a).unwrap();
    let curve = kerr_ergosphere_curves(m, a, ErgoBranch::Outer, 0.02).unwrap();
    for v in curve.vertices.iter().step_by(17) {
        let g00 = g00_covariant(&ks, &[v[0], 0.0, v[1]]).unwrap();
        assert!(g00.abs() < 1e-10, "g00 = {g00:e} at {v:?}");
    }
    assert!(matches!(
        kerr_ergosphere_curves(m, 0.0, ErgoBranch::Inner, 0.02),
        Err(Error::NotFound(_))
    ));
}

#[test]
fn kerr_verify_passes_for_reference_spins() {
    for a in [0.0, 0.6, 0.9] {
        let rep = kerr_verify(1.0, a, 200, 0.05).unwrap();
        assert!(rep.passed, "a = {a}: {rep:?}");
        assert!(rep.max_scaled_delta1 < KERR_DELTA1_TOL);
        assert!(rep.max_contour_error < KERR_CONTOUR_TOL);
        assert_eq!(rep.degenerate.is_some(), a == 0.0);
    }
}

#[test]
fn curve_helpers() {
    let c = ClosedCurve::circle([1.0, -1.0], 2.0, 0.01);
    assert!(c.max_spacing() <= 0.01 + 1e-12);
    assert!(c.contains([1.5, -1.0]) && !c.contains([3.5, -1.0]));
    let (mean, lo, hi) = c.radius_stats([1.0, -1.0]);
    assert!((mean - 2.0).abs() < 1e-12 && hi - lo < 1e-12);
    assert!((c.distance_to([4.0, -1.0]) - 1.0).abs() < 1e-4);
}
