use artbh_core::curve::{norm, ClosedCurve};
use artbh_core::ergosphere::{find_ergosphere, kerr_r_cyl};
use artbh_core::horizon::*;
use artbh_core::metric::*;
use artbh_core::stability::{residual_scan, schwarzschild_type_test};
use artbh_core::Error;

fn bathtub_horizon(a: f64, b: FourierB) -> Result<(SpacetimeMetric, HorizonReport), Error> {
    let m = draining_bathtub(a, b);
    let ergo = find_ergosphere(&m, 0.02)?;
    let inner = choose_inner_curve(&m, &ergo)?;
    let rep = find_limit_cycle(&m, &ergo, &inner, &FinderOptions::default())?;
    Ok((m, rep))
}

#[test]
fn bathtub_limit_cycle_is_the_unit_circle() {
    for b in [0.25, 0.5, 1.0] {
        let (_, rep) = bathtub_horizon(1.0, FourierB::constant(b)).unwrap();
        let err = rep.curve.vertices.iter().map(|v| (norm(*v) - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "B = {b}: radius error {err:e}");
        assert_eq!(rep.kind, HoleKind::WhiteHole);
        assert!(rep.char_residual < 1e-8, "B = {b}: residual {:e}", rep.char_residual);
        assert_eq!(rep.label, HorizonLabel::Planar);
        assert!(rep.return_map_slope.abs() < 1.0, "attracting cycle expected");
    }
}

#[test]
fn inflow_gives_a_black_hole() {
    let (_, rep) = bathtub_horizon(-1.0, FourierB::constant(0.5)).unwrap();
    assert_eq!(rep.kind, HoleKind::BlackHole);
    assert!((rep.radius_mean - 1.0).abs() < 1e-6);
}

#[test]
fn ergosphere_gap_matches_closed_form() {
    let mut last = 0.0;
    for b in [0.1, 0.2, 0.4] {
        let (m, rep) = bathtub_horizon(1.0, FourierB::constant(b)).unwrap();
        let (mean, lo, hi) = ergosphere_gap(&m, &rep.curve, rep.center).unwrap();
        let want = (1.0f64 + b * b).sqrt() - 1.0;
        assert!((mean - want).abs() < 1e-6, "B = {b}: gap {mean} vs {want}");
        assert!(hi - lo < 1e-6);
        assert!(mean > last);
        last = mean;
    }
}

#[test]
fn exact_circle_is_characteristic_and_classified() {
    let m = draining_bathtub(1.0, FourierB::constant(0.5));
    let c = ClosedCurve::circle([0.0, 0.0], 1.0, 0.01);
    assert!(is_characteristic_curve(&m, &c).unwrap().max < 1e-12);
    let (kind, s) = classify_horizon(&m, &c, 1e-8, 1e-10).unwrap();
    assert_eq!(kind, HoleKind::WhiteHole);
    assert!(s > 0.5);
    let off = ClosedCurve::circle([0.0, 0.0], 1.05, 0.01);
    assert!(matches!(
        classify_horizon(&m, &off, 1e-8, 1e-10),
        Err(Error::NotCharacteristic { .. })
    ));
}

#[test]
fn schwarzschild_type_ergosphere_is_refused_by_the_finder() {
    let m = draining_bathtub(1.0, FourierB::constant(0.0));
    let ergo = find_ergosphere(&m, 0.02).unwrap();
    let inner = ergo.scaled([0.0, 0.0], 0.6);
    assert!(matches!(
        find_limit_cycle(&m, &ergo, &inner, &FinderOptions::default()),
        Err(Error::ErgosphereCharacteristic { .. })
    ));
    let t = schwarzschild_type_test(&m, 0.02, 1e-8).unwrap();
    assert!(t.is_schwarzschild_type);
}

#[test]
fn sign_changing_swirl_defeats_the_finder() {
    // r = A stays characteristic for any B(θ), but the ergosphere touches it
    // where B vanishes, so neither the finder nor an ergosphere offset sees it
    let m = draining_bathtub(1.0, FourierB::cos(0.5));
    let circle = ClosedCurve::circle([0.0, 0.0], 1.0, 0.01);
    assert!(is_characteristic_curve(&m, &circle).unwrap().max < 1e-12);
    let (kind, _) = classify_horizon(&m, &circle, 1e-8, 1e-10).unwrap();
    assert_eq!(kind, HoleKind::WhiteHole);
    assert!(bathtub_horizon(1.0, FourierB::cos(0.5)).is_err());
    let ergo = find_ergosphere(&m, 0.02).unwrap();
    let (floor, _) = residual_scan(&m, &ergo, [0.0, 0.0], 0.1, 41).unwrap();
    assert!(floor > 1e-3, "residual floor {floor:e}");
}

#[test]
fn kerr_restricted_ergosphere_is_the_outer_horizon() {
    for a in [0.0, 0.6, 0.9] {
        let cyl = kerr_cylindrical(1.0, a).unwrap();
        let t = schwarzschild_type_test(&cyl, 0.05, 1e-8).unwrap();
        assert!(t.is_schwarzschild_type, "a = {a}: residual {:e}", t.residual);
        let rp = 1.0 + (1.0 - a * a as f64).sqrt();
        let err = t
            .ergosphere
            .vertices
            .iter()
            .map(|v| (kerr_r_cyl(v[0].abs(), v[1], a) - rp).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "a = {a}: radius error {err:e}");
    }
}

#[test]
fn characteristic_field_is_unit_and_null() {
    let m = draining_bathtub(1.0, FourierB::constant(0.5));
    for fam in [Family::Plus, Family::Minus] {
        let f = CharacteristicField::new(&m, fam);
        let p = [0.8, 0.5];
        let v = f.eval(p).unwrap();
        assert!((norm(v) - 1.0).abs() < 1e-12);
        let eta = f.covector(p).unwrap();
        assert!((v[0] * eta[0] + v[1] * eta[1]).abs() < 1e-12);
    }
    assert!(matches!(
        CharacteristicField::new(&m, Family::Plus).eval([2.0, 0.0]),
        Err(Error::OutsideErgosphere { .. })
    ));
}

#[test]
fn flow_converges_onto_the_horizon() {
    // the cycle attracts flow lines of one family from inside the annulus
    let (m, rep) = bathtub_horizon(1.0, FourierB::constant(0.5)).unwrap();
    let f = CharacteristicField::new(&m, rep.family);
    let path = flow_field(&f, [0.9, 0.0], 40.0 * rep.sigma_direction, None, &FlowOptions::default()).unwrap();
    let end = *path.points.last().unwrap();
    assert!((norm(end) - 1.0).abs() < 1e-4, "ended at radius {}", norm(end));
}
