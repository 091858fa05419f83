use approx::assert_abs_diff_eq;
use artbh_core::ergosphere::kerr_r;
use artbh_core::metric::*;
use artbh_core::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

#[test]
fn flat_is_minkowski() {
    for n in 1..=3 {
        let m = flat(n);
        let g = m.g_up(&vec![0.3; n]).unwrap();
        assert_eq!(g, minkowski(n));
        assert!(has_lorentz_signature(&g));
    }
}

#[test]
fn bathtub_matches_closed_form() {
    // v = (A r̂ + B θ̂)/r; g^{00} = 1, g^{0j} = v_j, g^{jk} = v_j v_k − δ_jk
    let (a, b) = (1.0, 0.5);
    let m = draining_bathtub(a, FourierB::constant(b));
    for &(x, y) in &[(0.6, 0.8), (-1.2, 0.4), (0.3, -2.1), (1.7, 1.7)] {
        let r2: f64 = x * x + y * y;
        let v = [(a * x - b * y) / r2, (a * y + b * x) / r2];
        let g = m.g_up(&[x, y]).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], 1.0, epsilon = 1e-15);
        for j in 0..2 {
            assert_abs_diff_eq!(g[(0, j + 1)], v[j], epsilon = 1e-14);
            for k in 0..2 {
                let d = if j == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g[(j + 1, k + 1)], v[j] * v[k] - d, epsilon = 1e-14);
            }
        }
        assert!(has_lorentz_signature(&g));
    }
}

#[test]
fn bathtub_core_is_out_of_domain() {
    let m = draining_bathtub(1.0, FourierB::constant(0.5));
    assert!(matches!(m.g_up(&[0.0, 0.0]), Err(Error::OutOfDomain { .. })));
    assert!(matches!(m.g_up(&[9.0, 0.0]), Err(Error::OutOfDomain { .. })));
}

#[test]
fn kerr_parameters_are_checked() {
    assert!(matches!(kerr_kerr_schild(1.0, 1.2), Err(Error::InvalidParameter(_))));
    assert!(matches!(kerr_cylindrical(-1.0, 0.0), Err(Error::InvalidParameter(_))));
    assert!(kerr_cylindrical(1.0, 1.0).is_ok());
}

#[test]
fn kerr_cartesian_and_cylindrical_agree() {
    // contravariant components transform with J = ∂(t, ρ, z, φ)/∂(t, x, y, z)
    let (m, a) = (1.0, 0.6);
    let ks = kerr_kerr_schild(m, a).unwrap();
    let cyl = kerr_cylindrical(m, a).unwrap();
    let mut worst = 0.0f64;
    for k in 0..100 {
        let t = k as f64;
        let rho = 2.5 + 3.0 * (0.37 * t).sin().abs();
        let z = 4.0 * (0.61 * t + 0.3).sin();
        let phi = -3.0 + 6.0 * ((0.23 * t).sin() * 0.5 + 0.5);
        let (c, s) = (phi.cos(), phi.sin());
        let gc = ks.g_up(&[rho * c, rho * s, z]).unwrap();
        let mut j = DMatrix::zeros(4, 4);
        j[(0, 0)] = 1.0;
        j[(1, 1)] = c;
        j[(1, 2)] = s;
        j[(2, 3)] = 1.0;
        j[(3, 1)] = -s / rho;
        j[(3, 2)] = c / rho;
        let want = &j * gc * j.transpose();
        let got = cyl.g_up(&[rho, z, phi]).unwrap();
        worst = worst.max(max_diff(&want, &got));
    }
    assert!(worst < 1e-12, "max component difference {worst:e}");
}

#[test]
fn kerr_is_asymptotically_flat() {
    let ks = kerr_kerr_schild(1.0, 0.9).unwrap().with_bbox(Bbox::cube(3, 1e7));
    let g = ks.g_up(&[3e6, 2e6, -1e6]).unwrap();
    assert!(max_diff(&g, &minkowski(3)) < 1e-5);
}

#[test]
fn kerr_a_zero_is_schwarzschild_radius() {
    // oblate radius reduces to |x| for a = 0
    assert_abs_diff_eq!(kerr_r(1.0, 2.0, 2.0, 0.0), 3.0, epsilon = 1e-15);
    // and on the equator it is √(R² − a²)
    assert_abs_diff_eq!(kerr_r(2.0, 0.0, 0.0, 0.6), (4.0f64 - 0.36).sqrt(), epsilon = 1e-14);
}

#[test]
fn analytic_gradients_match_differences() {
    let metrics = vec![
        (draining_bathtub(1.0, FourierB { b0: 0.5, b1: 0.2, c1: -0.1 }), vec![0.7, -0.9]),
        (kerr_kerr_schild(1.0, 0.6).unwrap(), vec![2.1, -1.3, 0.8]),
        (kerr_cylindrical(1.0, 0.9).unwrap(), vec![2.4, 0.7, 0.3]),
        (kerr_meridian(1.0, 0.6, 0.1).unwrap(), vec![-2.2, 1.1]),
    ];
    for (m, x) in metrics {
        let an = m.grad_up(&x).unwrap();
        let fd = m.central_grad(&x, 1e-5).unwrap();
        for (p, (ga, gf)) in an.iter().zip(&fd).enumerate() {
            let d = max_diff(ga, gf);
            assert!(d < 1e-7, "{}: d/dx{p} differs by {d:e}", m.name);
        }
    }
}

#[test]
fn meridian_reduction_of_cylindrical_kerr_is_the_meridian_block() {
    let cyl = kerr_cylindrical(1.0, 0.6).unwrap();
    let red = meridian_reduction(&cyl).unwrap();
    let mer = kerr_meridian(1.0, 0.6, 0.0).unwrap();
    for p in [[2.0, 1.0], [3.0, -0.5], [-2.5, 0.4]] {
        let d = max_diff(&red.g_up(&p).unwrap(), &mer.g_up(&p).unwrap());
        assert!(d < 1e-12, "at {p:?}: {d:e}");
    }
}

#[test]
fn perturbation_family_members() {
    let fam = perturbation_family(
        Flow::vortex(1.0, FourierB::constant(0.0)),
        Flow::vortex(0.0, FourierB::cos(1.0)),
        0.2,
    );
    let m = fam.member(0.1).unwrap();
    let direct = draining_bathtub(1.0, FourierB::cos(0.1));
    let p = [0.4, 1.1];
    assert!(max_diff(&m.g_up(&p).unwrap(), &direct.g_up(&p).unwrap()) < 1e-15);
    assert!(matches!(fam.member(0.3), Err(Error::InvalidParameter(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bathtub_signature_holds_everywhere(
        a in -2.0f64..2.0, b in -2.0f64..2.0,
        r in 0.3f64..4.0, th in 0.0f64..6.28,
    ) {
        let m = draining_bathtub(a, FourierB::constant(b));
        let g = m.g_up(&[r * th.cos(), r * th.sin()]).unwrap();
        prop_assert!(has_lorentz_signature(&g));
        // Δ = det of the spatial block has the sign of |v|² − 1 (here c = 1)
        let v2 = (a * a + b * b) / (r * r);
        let det = spatial_block(&g).determinant();
        prop_assert!((det - (1.0 - v2)).abs() < 1e-9 * (1.0 + v2));
    }

    #[test]
    fn metric_is_symmetric(x in -4.0f64..4.0, y in -4.0f64..4.0, z in -4.0f64..4.0) {
        prop_assume!(x * x + y * y + z * z > 4.0);
        let g = kerr_kerr_schild(1.0, 0.7).unwrap().g_up(&[x, y, z]).unwrap();
        prop_assert!(max_diff(&g, &g.transpose()) == 0.0);
        prop_assert!(has_lorentz_signature(&g));
    }
}
