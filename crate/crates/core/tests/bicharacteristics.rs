use artbh_core::bicharacteristics::*;
use artbh_core::curve::ClosedCurve;
use artbh_core::metric::*;
use artbh_core::Error;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn opts() -> RayOptions {
    RayOptions::default()
}

fn theta(x: &[f64]) -> f64 {
    x[1].atan2(x[0])
}

fn radius(x: &[f64]) -> f64 {
    x[0].hypot(x[1])
}

/// Polar angle along a path, continued through ±π.
fn unwrapped(path: &RayPath) -> Vec<f64> {
    let mut out = vec![theta(&path.states[0].x)];
    for w in path.states.windows(2) {
        let mut d = theta(&w[1].x) - theta(&w[0].x);
        if d > std::f64::consts::PI {
            d -= TWO_PI;
        } else if d < -std::f64::consts::PI {
            d += TWO_PI;
        }
        out.push(out.last().unwrap() + d);
    }
    out
}

fn rk4(f: impl Fn(f64) -> f64, y0: f64, span: f64, n: usize) -> f64 {
    let h = span / n as f64;
    let mut y = y0;
    for _ in 0..n {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

#[test]
fn hamiltonian_values() {
    let m = flat(2);
    assert_eq!(hamiltonian(&m, &[0.0, 0.0], &[1.0, 1.0, 0.0]).unwrap(), 0.0);
    assert_eq!(hamiltonian(&m, &[0.0, 0.0], &[2.0, 1.0, 1.0]).unwrap(), 2.0);
    // bathtub at (1, 0) with A = 1, B = 0.5: v = (1, 0.5)
    let b = draining_bathtub(1.0, FourierB::constant(0.5));
    let xi = [1.0, 0.3, -0.2];
    let v_xi: f64 = 0.3 - 0.1;
    let want = (1.0 + v_xi) * (1.0 + v_xi) - (0.09 + 0.04);
    assert!((hamiltonian(&b, &[1.0, 0.0], &xi).unwrap() - want).abs() < 1e-14);
    let xi0 = null_xi0(&b, &[1.0, 0.0], &xi[1..]).unwrap();
    assert!(hamiltonian(&b, &[1.0, 0.0], &[xi0, 0.3, -0.2]).unwrap().abs() < 1e-14);
}

#[test]
fn flat_ray_is_a_straight_line() {
    let m = flat(2);
    let st = PhaseState::new(0.0, vec![0.0, 0.0], 1.0, vec![1.0, 0.0]);
    let p = integrate_bicharacteristic(&m, &st, 1.0, &opts()).unwrap();
    assert_eq!(p.termination, RayTermination::Completed);
    for s in &p.states {
        assert!((s.x0 - 2.0 * s.s).abs() < 1e-12);
        assert!((s.x[0] + 2.0 * s.s).abs() < 1e-12);
        assert!(s.x[1].abs() < 1e-15);
        assert_eq!(s.xi, vec![1.0, 0.0]);
    }
    assert_eq!(p.h_drift, 0.0);
    assert!((p.end().s - 1.0).abs() < 1e-15);
}

#[test]
fn non_null_start_is_rejected() {
    let m = flat(2);
    let st = PhaseState::new(0.0, vec![0.0, 0.0], 2.0, vec![1.0, 0.0]);
    assert!(integrate_bicharacteristic(&m, &st, 1.0, &opts()).is_err());
}

#[test]
fn ray_leaving_the_box_reports_domain_exit() {
    let m = flat(2).with_bbox(Bbox::cube(2, 1.0));
    let st = PhaseState::new(0.0, vec![0.0, 0.0], 1.0, vec![1.0, 0.0]);
    let p = integrate_bicharacteristic(&m, &st, 5.0, &opts()).unwrap();
    match &p.termination {
        RayTermination::DomainExit { s, .. } => assert!(*s < 0.51),
        t => panic!("expected a domain exit, got {t:?}"),
    }
    assert!(matches!(p.require_complete(), Err(Error::OutOfDomain { .. })));
}

#[test]
fn null_direction_count_follows_the_ergosphere() {
    let m = draining_bathtub(1.0, FourierB::constant(0.5));
    let r_e = 1.25f64.sqrt();
    assert_eq!(null_spatial_directions(&m, &[0.9, 0.2]).unwrap().count(), 2);
    assert_eq!(null_spatial_directions(&m, &[r_e, 0.0]).unwrap().count(), 1);
    assert_eq!(null_spatial_directions(&m, &[2.0, 1.0]).unwrap().count(), 0);
    if let NullDirections::Two { eta } = null_spatial_directions(&m, &[0.9, 0.2]).unwrap() {
        let g = m.g_up(&[0.9, 0.2]).unwrap();
        for e in eta {
            let q = g[(1, 1)] * e[0] * e[0] + 2.0 * g[(1, 2)] * e[0] * e[1] + g[(2, 2)] * e[1] * e[1];
            assert!(q.abs() < 1e-14);
        }
    }
}

#[test]
fn timelike_vectors() {
    let m = flat(2);
    assert!(timelike_test(&m, &[0.0, 0.0], &[1.0, 0.5, 0.0]).unwrap());
    assert!(!timelike_test(&m, &[0.0, 0.0], &[1.0, 2.0, 0.0]).unwrap());
    assert!(!timelike_test(&m, &[0.0, 0.0], &[-1.0, 0.0, 0.0]).unwrap());
    assert!(timelike_test(&m, &[0.0, 0.0], &[1.0, 0.0]).is_err());
}

#[test]
fn cone_projections_need_the_ergoregion() {
    let m = draining_bathtub(1.0, FourierB::constant(0.5));
    let c = forward_cone_projections(&m, &[0.9, 0.2]).unwrap();
    assert!(!c.merged);
    assert!(c.delta < 0.0);
    assert!(matches!(
        forward_cone_projections(&m, &[2.0, 0.0]),
        Err(Error::NotInsideErgosphere { .. })
    ));
}

#[test]
fn trapped_verdicts() {
    let b = FourierB::constant(0.5);
    let inner = ClosedCurve::circle([0.0, 0.0], 0.8, 0.01);
    let between = ClosedCurve::circle([0.0, 0.0], 1.05, 0.01);
    let wh = draining_bathtub(1.0, b);
    let bh = draining_bathtub(-1.0, b);
    assert_eq!(trapped_condition_check(&wh, &inner).unwrap(), TrappedVerdict::AllOutward);
    assert_eq!(trapped_condition_check(&bh, &inner).unwrap(), TrappedVerdict::AllInward);
    assert_eq!(trapped_condition_check(&wh, &between).unwrap(), TrappedVerdict::Mixed);
    let outside = ClosedCurve::circle([0.0, 0.0], 1.5, 0.01);
    assert!(trapped_condition_check(&wh, &outside).is_err());
}

#[test]
fn flat_influence_fan_is_a_unit_circle() {
    let m = flat(2);
    let fans = influence_fan(&m, &[vec![0.0, 0.0], vec![0.5, -0.5]], 1.0, 24, &opts()).unwrap();
    for f in &fans {
        assert!(f.reached.iter().all(|r| *r));
        for p in &f.endpoints {
            let d = (p[0] - f.seed[0]).hypot(p[1] - f.seed[1]);
            assert!((d - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn random_seeds_conserve_the_hamiltonian() {
    let suites: Vec<(SpacetimeMetric, [f64; 2])> = vec![
        (flat(2), [0.5, 3.0]),
        (draining_bathtub(1.0, FourierB::constant(0.5)), [1.5, 3.0]),
        (kerr_cylindrical(1.0, 0.6).unwrap(), [3.0, 6.0]),
    ];
    for (m, radii) in suites {
        let seeds = random_null_seeds(&m, 100, 7, radii).unwrap();
        assert_eq!(seeds.len(), 100);
        for st in &seeds {
            let p = integrate_bicharacteristic(&m, st, 0.5, &opts()).unwrap();
            assert!(p.h_drift <= 1e-8, "{}: h drift {:e}", m.name, p.h_drift);
            assert!(p.xi0_drift <= 1e-14);
        }
    }
}

#[test]
fn random_seeds_are_reproducible() {
    let m = draining_bathtub(1.0, FourierB::constant(0.5));
    let a = random_null_seeds(&m, 10, 42, [1.5, 3.0]).unwrap();
    let b = random_null_seeds(&m, 10, 42, [1.5, 3.0]).unwrap();
    let c = random_null_seeds(&m, 10, 43, [1.5, 3.0]).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

/// Projected null rays with ξ₀ = 0 trace the characteristic curves
/// dr/dθ = r (A² − r²) / (AB ± r √(A² + B² − r²)).
#[test]
fn bathtub_rays_follow_the_scalar_characteristic_ode() {
    let (a, b) = (1.0f64, 0.5f64);
    let m = draining_bathtub(a, FourierB::constant(b));
    for x in [[0.9, 0.2], [-0.3, 0.8], [0.5, 0.5], [0.6, -0.6]] {
        let NullDirections::Two { eta } = null_spatial_directions(&m, &x).unwrap() else {
            panic!("{x:?} should be inside the ergosphere");
        };
        for e in eta {
            let st = PhaseState::new(0.0, x.to_vec(), 0.0, e.to_vec());
            let p = integrate_bicharacteristic(&m, &st, 0.3, &opts()).unwrap();
            assert_eq!(p.termination, RayTermination::Completed);
            // pick the branch from the initial tangent, (r dθ)/dr
            let (p0, p1) = (&p.states[0].x, &p.states[1].x);
            let r0 = radius(p0);
            let slope = r0 * (theta(p1) - theta(p0)) / (radius(p1) - r0);
            let root = r0 * (a * a + b * b - r0 * r0).sqrt();
            let plus = (a * b + root) / (a * a - r0 * r0);
            let minus = (a * b - root) / (a * a - r0 * r0);
            let sign = if (slope - plus).abs() < (slope - minus).abs() { 1.0 } else { -1.0 };
            let f = |r: f64| r * (a * a - r * r) / (a * b + sign * r * (a * a + b * b - r * r).max(0.0).sqrt());
            let th = unwrapped(&p);
            let oracle = rk4(f, r0, th.last().unwrap() - th[0], 100_000);
            let err = (radius(&p.end().x) - oracle).abs();
            assert!(err < 1e-6, "start {x:?}, branch {sign}: endpoint error {err:e}");
        }
    }
}

#[test]
fn bathtub_without_swirl_has_tangent_circles() {
    // B = 0: the characteristics are the circles r = A cos(θ − θ₀)
    let a = 1.0f64;
    let m = draining_bathtub(a, FourierB::constant(0.0));
    for x in [[0.9, 0.2], [0.0, 0.9], [0.5, 0.5], [-0.3, 0.8]] {
        let NullDirections::Two { eta } = null_spatial_directions(&m, &x).unwrap() else {
            panic!()
        };
        for e in eta {
            let st = PhaseState::new(0.0, x.to_vec(), 0.0, e.to_vec());
            let p = integrate_bicharacteristic(&m, &st, 0.2, &opts()).unwrap();
            let th = unwrapped(&p);
            let r0 = radius(&x);
            let off = (r0 / a).acos();
            let fit = |t0: f64| {
                p.states
                    .iter()
                    .zip(&th)
                    .map(|(s, t)| (radius(&s.x) - a * (t - t0).cos()).abs())
                    .fold(0.0, f64::max)
            };
            let err = fit(th[0] - off).min(fit(th[0] + off));
            assert!(err < 1e-6, "start {x:?}: circle error {err:e}");
            assert!(p.states.len() > 5);
        }
    }
}
