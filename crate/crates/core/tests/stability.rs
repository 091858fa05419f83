use artbh_core::metric::*;
use artbh_core::stability::*;
use artbh_core::Error;

#[test]
fn constant_swirl_perturbations_keep_the_horizon() {
    let fam = perturbation_family(
        Flow::vortex(1.0, FourierB::constant(0.5)),
        Flow::vortex(0.0, FourierB::constant(1.0)),
        0.2,
    );
    let eps = [0.0, 0.05, 0.1, 0.2];
    let res = horizon_persistence_scan(&fam, &eps, &ScanOptions::default()).unwrap();
    assert_eq!(res.verdict, Verdict::StablePersistence);
    let radii: Vec<f64> = res.outcomes.iter().map(|o| o.radius_mean().unwrap()).collect();
    let drift = radii.iter().map(|r| (r - radii[0]).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-6, "radius drift {drift:e}");
}

#[test]
fn cosine_swirl_destroys_the_schwarzschild_horizon() {
    let fam = perturbation_family(
        Flow::vortex(1.0, FourierB::constant(0.0)),
        Flow::vortex(0.0, FourierB::cos(1.0)),
        0.1,
    );
    let res = horizon_persistence_scan(&fam, &[0.0, 0.05, 0.1], &ScanOptions::default()).unwrap();
    assert_eq!(res.verdict, Verdict::UnstableLoss);
    assert!(res.outcomes[0].is_horizon());
    for o in &res.outcomes[1..] {
        match o {
            EpsOutcome::NoHorizon { residual_floor, .. } => {
                let f = residual_floor.expect("residual scan ran");
                assert!(f > 1e-3, "floor {f:e}");
            }
            other => panic!("expected no horizon, got {other:?}"),
        }
    }
}

#[test]
fn scan_requires_the_base_member() {
    let fam = perturbation_family(
        Flow::vortex(1.0, FourierB::constant(0.5)),
        Flow::vortex(0.0, FourierB::constant(1.0)),
        0.2,
    );
    assert!(matches!(
        horizon_persistence_scan(&fam, &[0.1], &ScanOptions::default()),
        Err(Error::PreconditionFailed(_))
    ));
}

#[test]
fn radial_family_without_swirl_is_preserved() {
    let res = preserved_family_demo(
        &[0.0, 0.1, 0.2],
        &|e| 1.0 + 0.5 * e,
        &|_| FourierB::constant(0.0),
        1.0,
        &ScanOptions::default(),
    )
    .unwrap();
    assert_eq!(res.verdict, Verdict::PreservedByConstruction);
    for (e, o) in res.eps.iter().zip(&res.outcomes) {
        assert!((o.radius_mean().unwrap() - (1.0 + 0.5 * e)).abs() < 1e-6);
    }
}

#[test]
fn preserved_demo_checks_its_schedule() {
    let r = preserved_family_demo(
        &[0.0, 0.1],
        &|e| 1.2 + e,
        &|_| FourierB::constant(0.0),
        1.0,
        &ScanOptions::default(),
    );
    assert!(matches!(r, Err(Error::PreconditionFailed(_))));
}

#[test]
fn schwarzschild_type_detection() {
    let sch = schwarzschild_type_test(&draining_bathtub(1.0, FourierB::constant(0.0)), 0.02, 1e-8).unwrap();
    assert!(sch.is_schwarzschild_type);
    let rot = schwarzschild_type_test(&draining_bathtub(1.0, FourierB::constant(0.5)), 0.02, 1e-8).unwrap();
    assert!(!rot.is_schwarzschild_type);
    assert!(rot.residual > 1e-2);
}
