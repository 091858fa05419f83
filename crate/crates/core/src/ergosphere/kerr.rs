//! Numerical verification of the Kerr closed forms: Δ₁ vanishes exactly on
//! the surfaces `r = r±`, and its contours map back onto them.

use serde::Serialize;

use super::{
    extract_contour, kerr_horizon_radii, kerr_r_cyl, kerr_surface_point, restricted_delta1, FieldLabel,
    ScalarField2D,
};
use crate::curve::{norm, ClosedCurve};
use crate::error::Result;
use crate::metric::{kerr_cylindrical, kerr_kerr_schild, kerr_meridian};

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceCheck {
    pub surface: String,
    pub radius: f64,
    pub n_samples: usize,
    /// max |Δ₁| of the numerically evaluated metric
    pub max_abs_delta1: f64,
    /// max |Δ₁| / (largest |g^{ab}| of the (ρ, z) block)²
    pub max_scaled_delta1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContourCheck {
    pub surface: String,
    pub radius: f64,
    pub n_vertices: usize,
    /// max |kerr_r(vertex) − r±| over the matching Δ₁ contour
    pub max_radius_error: f64,
}

/// `a = 0`: the g₀₀ ergosphere and the Δ₁ horizon both sit on `R = 2m`.
#[derive(Debug, Clone, Serialize)]
pub struct DegenerateCheck {
    pub ergosphere_max_error: f64,
    pub horizon_max_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KerrVerifyReport {
    pub m: f64,
    pub a: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    pub surfaces: Vec<SurfaceCheck>,
    pub contours: Vec<ContourCheck>,
    pub degenerate: Option<DegenerateCheck>,
    pub max_scaled_delta1: f64,
    pub max_contour_error: f64,
    pub passed: bool,
    #[serde(skip)]
    pub curves: Vec<ClosedCurve>,
}

/// Scaled-residual bound for the surfaces and radius bound for the contours.
pub const KERR_DELTA1_TOL: f64 = 1e-10;
pub const KERR_CONTOUR_TOL: f64 = 1e-6;

/// Check Δ₁ on `n_samples` points of each surface `r = r±` (open angles
/// `ϑ ∈ (0, π)`, away from the axis), then extract Δ₁ contours with grid
/// spacing `h` on the meridian plane and map them through `kerr_r`.
/// `r₋ = 0` for `a = 0` is skipped.
pub fn kerr_verify(m: f64, a: f64, n_samples: usize, h: f64) -> Result<KerrVerifyReport> {
    let (rp, rm) = kerr_horizon_radii(m, a)?;
    let cyl = kerr_cylindrical(m, a)?;
    let mut targets = vec![("r_plus", rp)];
    if a > 0.0 {
        targets.push(("r_minus", rm));
    }

    let mut surfaces = Vec::new();
    for &(name, r) in &targets {
        let (mut max_abs, mut max_scaled) = (0.0f64, 0.0f64);
        for k in 0..n_samples {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / n_samples as f64;
            let p = kerr_surface_point(r, a, th);
            let d1 = restricted_delta1(&cyl, p[0], p[1])?;
            let g = cyl.g_up(&[p[0], p[1], 0.0])?;
            let scale = [g[(1, 1)], g[(2, 2)], g[(1, 2)]]
                .iter()
                .fold(0.0f64, |s, v| s.max(v.abs()))
                .max(1.0);
            max_abs = max_abs.max(d1.abs());
            max_scaled = max_scaled.max(d1.abs() / (scale * scale));
        }
        surfaces.push(SurfaceCheck {
            surface: name.into(),
            radius: r,
            n_samples,
            max_abs_delta1: max_abs,
            max_scaled_delta1: max_scaled,
        });
    }

    let mer = kerr_meridian(m, a, 0.0)?;
    let field = ScalarField2D::new(&mer, FieldLabel::Delta1);
    let half = 1.25 * (rp * rp + a * a).sqrt() + 2.0 * h;
    let set = extract_contour(&field, [-half, -half], [half, half], h)?;
    let mut contours = Vec::new();
    let mut curves = Vec::new();
    for &(name, r) in &targets {
        // the loop whose mean kerr radius is closest to the target
        let best = set
            .closed
            .iter()
            .map(|c| {
                let err = c
                    .vertices
                    .iter()
                    .map(|v| (kerr_r_cyl(v[0].abs(), v[1], a) - r).abs())
                    .fold(0.0f64, f64::max);
                (err, c)
            })
            .min_by(|x, y| x.0.total_cmp(&y.0));
        let (err, n) = match best {
            Some((err, c)) => {
                curves.push(c.clone());
                (err, c.len())
            }
            None => (f64::INFINITY, 0),
        };
        contours.push(ContourCheck {
            surface: name.into(),
            radius: r,
            n_vertices: n,
            max_radius_error: err,
        });
    }

    let degenerate = if a == 0.0 {
        let ks = kerr_kerr_schild(m, 0.0)?;
        let g00 = ScalarField2D::on_slice(&ks, FieldLabel::G00, |p| vec![p[0], 0.0, p[1]]);
        let ergo = extract_contour(&g00, [-half, -half], [half, half], h)?;
        let ergo_err = ergo
            .outermost()
            .map(|c| {
                curves.push(c.clone());
                c.vertices.iter().map(|v| (norm(*v) - 2.0 * m).abs()).fold(0.0, f64::max)
            })
            .unwrap_or(f64::INFINITY);
        Some(DegenerateCheck {
            ergosphere_max_error: ergo_err,
            horizon_max_error: contours[0].max_radius_error.max((rp - 2.0 * m).abs()),
        })
    } else {
        None
    };

    let max_scaled = surfaces.iter().map(|s| s.max_scaled_delta1).fold(0.0, f64::max);
    let max_contour = contours.iter().map(|c| c.max_radius_error).fold(0.0, f64::max);
    let passed = max_scaled < KERR_DELTA1_TOL
        && max_contour < KERR_CONTOUR_TOL
        && degenerate
            .as_ref()
            .map_or(true, |d| d.ergosphere_max_error < KERR_CONTOUR_TOL && d.horizon_max_error < KERR_CONTOUR_TOL);
    Ok(KerrVerifyReport {
        m,
        a,
        r_plus: rp,
        r_minus: rm,
        surfaces,
        contours,
        degenerate,
        max_scaled_delta1: max_scaled,
        max_contour_error: max_contour,
        passed,
        curves,
    })
}
