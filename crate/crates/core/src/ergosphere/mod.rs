//! Ergospheres: zero sets of the spatial determinant Δ, of g₀₀, and of the
//! restricted determinant Δ₁ for axisymmetric metrics; Kerr closed forms.

pub mod contour;
mod kerr;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::{ClosedCurve, P2};
use crate::error::{Error, Result};
use crate::metric::{families, spatial_block, SpacetimeMetric};

pub use contour::{extract_contour, extract_contour_with, ContourOptions, ContourSet, PlanarField};
pub use families::{kerr_r, kerr_r_cyl};
pub use kerr::{kerr_verify, ContourCheck, DegenerateCheck, KerrVerifyReport, SurfaceCheck, KERR_CONTOUR_TOL, KERR_DELTA1_TOL};

/// `Δ(x) = det [g^{jk}(x)]_{j,k≥1}`.
pub fn delta(metric: &SpacetimeMetric, x: &[f64]) -> Result<f64> {
    Ok(spatial_block(&metric.g_up(x)?).determinant())
}

/// Covariant `g₀₀ = Δ / det g^{jk}` (cofactor formula).
pub fn g00_covariant(metric: &SpacetimeMetric, x: &[f64]) -> Result<f64> {
    let g = metric.g_up(x)?;
    let det = g.determinant();
    if det.abs() <= crate::metric::DEGENERACY_FLOOR {
        return Err(Error::DegenerateMetric { x: x.to_vec(), det });
    }
    Ok(spatial_block(&g).determinant() / det)
}

/// `g^{11} g^{22} − (g^{12})²` of the `(ρ, z)` block. Works for 3D families in
/// `(ρ, z, φ)` coordinates and for 2D meridian metrics.
pub fn restricted_delta1(metric: &SpacetimeMetric, rho: f64, z: f64) -> Result<f64> {
    let g = match metric.n() {
        2 => metric.g_up(&[rho, z])?,
        3 => metric.g_up(&[rho, z, 0.0])?,
        n => {
            return Err(Error::InvalidParameter(format!(
                "restricted Δ₁ needs n = 2 or 3, got {n}"
            )))
        }
    };
    Ok(g[(1, 1)] * g[(2, 2)] - g[(1, 2)] * g[(2, 1)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldLabel {
    Delta,
    Delta1,
    G00,
}

/// A planar scalar field derived from a metric, possibly through an embedding
/// of the plane into a higher-dimensional space.
#[derive(Clone)]
pub struct ScalarField2D {
    pub label: FieldLabel,
    metric: SpacetimeMetric,
    embed: Option<Arc<dyn Fn(P2) -> Vec<f64> + Send + Sync>>,
}

impl std::fmt::Debug for ScalarField2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarField2D({:?} of {})", self.label, self.metric.name)
    }
}

impl ScalarField2D {
    pub fn new(metric: &SpacetimeMetric, label: FieldLabel) -> Self {
        ScalarField2D {
            label,
            metric: metric.clone(),
            embed: None,
        }
    }

    /// Field on the image of the plane under `embed` (e.g. the `y = 0` slice).
    pub fn on_slice<E>(metric: &SpacetimeMetric, label: FieldLabel, embed: E) -> Self
    where
        E: Fn(P2) -> Vec<f64> + Send + Sync + 'static,
    {
        ScalarField2D {
            label,
            metric: metric.clone(),
            embed: Some(Arc::new(embed)),
        }
    }

    pub fn eval(&self, p: P2) -> Result<f64> {
        match self.label {
            FieldLabel::Delta1 => restricted_delta1(&self.metric, p[0], p[1]),
            FieldLabel::Delta | FieldLabel::G00 => {
                let x = match &self.embed {
                    Some(e) => e(p),
                    None => p.to_vec(),
                };
                if self.label == FieldLabel::Delta {
                    delta(&self.metric, &x)
                } else {
                    g00_covariant(&self.metric, &x)
                }
            }
        }
    }
}

impl PlanarField for ScalarField2D {
    fn value(&self, p: P2) -> Option<f64> {
        self.eval(p).ok()
    }
}

/// Ergosphere of a planar metric: the outermost closed Δ-contour in the box.
pub fn find_ergosphere(metric: &SpacetimeMetric, h: f64) -> Result<ClosedCurve> {
    if metric.n() != 2 {
        return Err(Error::InvalidParameter("planar ergosphere needs n = 2".into()));
    }
    let field = ScalarField2D::new(metric, FieldLabel::Delta);
    let b = &metric.bbox;
    let set = extract_contour(&field, [b.lo[0], b.lo[1]], [b.hi[0], b.hi[1]], h)?;
    set.outermost()
        .cloned()
        .ok_or_else(|| Error::NotFound("no closed ergosphere curve in the box".into()))
}

/// Kerr horizon radii `r± = m ± √(m² − a²)`.
pub fn kerr_horizon_radii(m: f64, a: f64) -> Result<(f64, f64)> {
    if !(m > 0.0) || !(0.0..=m).contains(&a) {
        return Err(Error::InvalidParameter(format!(
            "need m > 0 and 0 <= a <= m (m = {m}, a = {a})"
        )));
    }
    let s = (m * m - a * a).sqrt();
    Ok((m + s, m - s))
}

/// Closed form of Δ₁ for Kerr as a function of `r`.
pub fn kerr_delta1_closed(m: f64, a: f64, r: f64) -> f64 {
    (r * r - 2.0 * m * r + a * a) / (r * r + a * a)
}

/// Point of the meridian plane on the surface `r = const` at angle `ϑ`.
pub fn kerr_surface_point(r: f64, a: f64, vartheta: f64) -> P2 {
    [(r * r + a * a).sqrt() * vartheta.sin(), r * vartheta.cos()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErgoBranch {
    Outer,
    Inner,
}

/// Kerr ergosphere `r = m ± √(m² − a² z²/r²)` as a closed curve in the full
/// meridian plane `(ρ, z)` (both signs of ρ), sampled in the angle `ϑ` with
/// vertex spacing at most `h_curve`.
pub fn kerr_ergosphere_curves(m: f64, a: f64, which: ErgoBranch, h_curve: f64) -> Result<ClosedCurve> {
    if !(m > 0.0) || !(0.0..m).contains(&a) {
        return Err(Error::NotFound(format!(
            "ergosphere branches merge or degenerate for a >= m (m = {m}, a = {a})"
        )));
    }
    if which == ErgoBranch::Inner && a == 0.0 {
        return Err(Error::NotFound("inner ergosphere collapses to r = 0 when a = 0".into()));
    }
    let radius = |th: f64| {
        let c = th.cos();
        let s = (m * m - a * a * c * c).sqrt();
        match which {
            ErgoBranch::Outer => m + s,
            ErgoBranch::Inner => m - s,
        }
    };
    let extent = (4.0 * m * m + a * a).sqrt();
    let mut n = ((2.0 * std::f64::consts::PI * extent / h_curve).ceil() as usize).max(64);
    loop {
        let pts: Vec<P2> = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                kerr_surface_point(radius(th), a, th)
            })
            .collect();
        let curve = ClosedCurve::from_periodic_samples(pts, h_curve);
        if curve.max_spacing() <= h_curve {
            return Ok(curve);
        }
        n = n * 3 / 2;
    }
}
