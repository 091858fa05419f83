//! Stationary Lorentzian metrics in contravariant form.
//!
//! Index 0 is time; spatial indices run 1..=n. A metric is an
//! [`Arc`]-shared [`MetricFamily`] plus the bookkeeping every consumer needs:
//! declared bounding box, derivative mode and a label.

mod dual;
pub mod families;
pub mod fields;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use families::{
    Acoustic, Bathtub, Flat, FourierB, Gordon, KerrCylindrical, KerrMeridian, KerrSchild, Meridian,
};
pub use fields::{FlowField, GordonMedium, ScalarFn, VectorFn};

/// Axis-aligned box in `n` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bbox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        Bbox { lo, hi }
    }

    pub fn cube(n: usize, half: f64) -> Self {
        Bbox::new(vec![-half; n], vec![half; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

/// How coefficient derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DerivMode {
    Analytic,
    CentralDifference(f64),
}

/// A family of metrics: the raw coefficient map plus optional exact gradients.
///
/// Implementations must be pure: same input, same bits, from any thread.
pub trait MetricFamily: Send + Sync + fmt::Debug {
    fn space_dim(&self) -> usize;

    /// Contravariant matrix `g^{jk}(x)`, `(n+1)x(n+1)`. Raises `OutOfDomain`
    /// inside excluded regions (singularities, coordinate axes).
    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// `∂g^{jk}/∂x_p` for p = 1..=n, when an exact formula exists.
    fn grad_up(&self, _x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        None
    }

    fn default_bbox(&self) -> Bbox;

    fn label(&self) -> String;
}

/// Everything known about the metric at one point.
#[derive(Debug, Clone)]
pub struct MetricSample {
    pub x: Vec<f64>,
    pub g_up: DMatrix<f64>,
    pub g_down: DMatrix<f64>,
    pub det_down: f64,
    pub grad_up: Vec<DMatrix<f64>>,
}

#[derive(Clone)]
pub struct SpacetimeMetric {
    family: Arc<dyn MetricFamily>,
    pub deriv_mode: DerivMode,
    pub name: String,
    pub bbox: Bbox,
}

impl fmt::Debug for SpacetimeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpacetimeMetric")
            .field("name", &self.name)
            .field("deriv_mode", &self.deriv_mode)
            .field("bbox", &self.bbox)
            .finish()
    }
}

pub const DEGENERACY_FLOOR: f64 = 1e-14;

impl SpacetimeMetric {
    /// Wrap a family using its default box; derivatives are analytic when the
    /// family supplies them, otherwise central differences with `h = 1e-5·diam`.
    pub fn new<F: MetricFamily + 'static>(family: F) -> Self {
        let bbox = family.default_bbox();
        Self::from_arc(Arc::new(family), bbox)
    }

    pub fn from_arc(family: Arc<dyn MetricFamily>, bbox: Bbox) -> Self {
        let probe: Vec<f64> = bbox
            .lo
            .iter()
            .zip(&bbox.hi)
            .map(|(a, b)| a + 0.37 * (b - a))
            .collect();
        let analytic = family.grad_up(&probe).is_some();
        let deriv_mode = if analytic {
            DerivMode::Analytic
        } else {
            DerivMode::CentralDifference(1e-5 * bbox.diameter())
        };
        let name = family.label();
        SpacetimeMetric {
            family,
            deriv_mode,
            name,
            bbox,
        }
    }

    pub fn with_bbox(mut self, bbox: Bbox) -> Self {
        assert_eq!(bbox.dim(), self.n());
        if let DerivMode::CentralDifference(_) = self.deriv_mode {
            self.deriv_mode = DerivMode::CentralDifference(1e-5 * bbox.diameter());
        }
        self.bbox = bbox;
        self
    }

    pub fn with_deriv_mode(mut self, mode: DerivMode) -> Self {
        self.deriv_mode = mode;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn family(&self) -> &Arc<dyn MetricFamily> {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.family.space_dim()
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, metric expects {}",
                x.len(),
                self.n()
            )));
        }
        if !self.bbox.contains(x) {
            return Err(Error::out_of_domain(x, "outside bounding box"));
        }
        Ok(())
    }

    /// `g^{jk}(x)` without inversion or derivatives.
    pub fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        self.family.g_up(x)
    }

    /// Coefficient derivatives according to `deriv_mode`.
    pub fn grad_up(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_domain(x)?;
        match self.deriv_mode {
            DerivMode::Analytic => match self.family.grad_up(x) {
                Some(g) => g,
                None => self.central_grad(x, 1e-5 * self.bbox.diameter()),
            },
            DerivMode::CentralDifference(h) => self.central_grad(x, h),
        }
    }

    /// Central-difference gradient, ignoring the box (used for convergence checks).
    pub fn central_grad(&self, x: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
        let n = self.n();
        let mut out = Vec::with_capacity(n);
        let mut xp = x.to_vec();
        for p in 0..n {
            xp[p] = x[p] + h;
            let gp = self.family.g_up(&xp)?;
            xp[p] = x[p] - h;
            let gm = self.family.g_up(&xp)?;
            xp[p] = x[p];
            out.push((gp - gm) / (2.0 * h));
        }
        Ok(out)
    }

    pub fn eval(&self, x: &[f64]) -> Result<MetricSample> {
        let g_up = self.g_up(x)?;
        let det_up = g_up.determinant();
        if !det_up.is_finite() || det_up.abs() <= DEGENERACY_FLOOR {
            return Err(Error::DegenerateMetric {
                x: x.to_vec(),
                det: det_up,
            });
        }
        let g_down = g_up
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateMetric {
                x: x.to_vec(),
                det: det_up,
            })?;
        let grad_up = self.grad_up(x)?;
        Ok(MetricSample {
            x: x.to_vec(),
            g_up,
            g_down,
            det_down: 1.0 / det_up,
            grad_up,
        })
    }
}

/// Free-function form of [`SpacetimeMetric::eval`].
pub fn eval_metric(metric: &SpacetimeMetric, x: &[f64]) -> Result<MetricSample> {
    metric.eval(x)
}

/// Exactly one positive eigenvalue, the rest negative.
pub fn has_lorentz_signature(g: &DMatrix<f64>) -> bool {
    let eig = g.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1e-300);
    let pos = eig.eigenvalues.iter().filter(|&&l| l > 1e-13 * scale).count();
    let neg = eig.eigenvalues.iter().filter(|&&l| l < -1e-13 * scale).count();
    pos == 1 && neg == g.nrows() - 1
}

/// Spatial block `[g^{jk}]_{j,k>=1}`.
pub fn spatial_block(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows() - 1;
    g.view((1, 1), (n, n)).into_owned()
}

/// Minkowski `diag(1, -1, ..., -1)`.
pub fn minkowski(n: usize) -> DMatrix<f64> {
    let mut m = -DMatrix::identity(n + 1, n + 1);
    m[(0, 0)] = 1.0;
    m
}

pub fn flat(n: usize) -> SpacetimeMetric {
    SpacetimeMetric::new(Flat::new(n))
}

pub fn acoustic_metric(flow: FlowField) -> SpacetimeMetric {
    SpacetimeMetric::new(Acoustic::new(flow))
}

pub fn draining_bathtub(a: f64, b: FourierB) -> SpacetimeMetric {
    SpacetimeMetric::new(Bathtub::new(a, b))
}

pub fn gordon_metric(medium: GordonMedium) -> SpacetimeMetric {
    SpacetimeMetric::new(Gordon::new(medium))
}

pub fn kerr_kerr_schild(m: f64, a: f64) -> Result<SpacetimeMetric> {
    Ok(SpacetimeMetric::new(KerrSchild::new(m, a)?))
}

pub fn kerr_cylindrical(m: f64, a: f64) -> Result<SpacetimeMetric> {
    Ok(SpacetimeMetric::new(KerrCylindrical::new(m, a)?))
}

/// The `(t, ρ, z)` block of Kerr, extended to `ρ < 0` by reflection.
pub fn kerr_meridian(m: f64, a: f64, eps: f64) -> Result<SpacetimeMetric> {
    Ok(SpacetimeMetric::new(KerrMeridian::new(m, a, eps)?))
}

/// One-parameter acoustic family `v_ε = v_base + ε·δv` with `ρ = c = 1`.
#[derive(Debug, Clone)]
pub enum Flow {
    /// `v = (A/r) r̂ + (B(θ)/r) θ̂`
    Vortex { a: f64, b: FourierB },
    Custom(FlowField),
}

impl Flow {
    pub fn vortex(a: f64, b: FourierB) -> Self {
        Flow::Vortex { a, b }
    }

    fn velocity(&self) -> FlowField {
        match self {
            Flow::Vortex { a, b } => Bathtub::new(*a, *b).flow_field(),
            Flow::Custom(f) => f.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    pub base: Flow,
    pub delta: Flow,
    pub eps_max: f64,
    pub bbox: Option<Bbox>,
}

pub fn perturbation_family(base: Flow, delta: Flow, eps_max: f64) -> PerturbationFamily {
    PerturbationFamily {
        base,
        delta,
        eps_max,
        bbox: None,
    }
}

impl PerturbationFamily {
    pub fn with_bbox(mut self, bbox: Bbox) -> Self {
        self.bbox = Some(bbox);
        self
    }

    pub fn member(&self, eps: f64) -> Result<SpacetimeMetric> {
        if !(0.0..=self.eps_max).contains(&eps) {
            return Err(Error::InvalidParameter(format!(
                "eps = {eps} outside [0, {}]",
                self.eps_max
            )));
        }
        let metric = match (&self.base, &self.delta) {
            // vortex + vortex stays a vortex, keeping exact derivatives
            (Flow::Vortex { a, b }, Flow::Vortex { a: da, b: db }) => {
                draining_bathtub(a + eps * da, b.add_scaled(db, eps))
            }
            _ => {
                let base = self.base.velocity();
                let delta = self.delta.velocity();
                acoustic_metric(FlowField::sum(base, delta, eps))
            }
        };
        Ok(match &self.bbox {
            Some(b) => metric.with_bbox(b.clone()),
            None => metric,
        })
    }
}

/// The `(t, ρ, z)` block of an axisymmetric `(ρ, z, φ)` metric on the full
/// meridian plane. The box is nudged off-centre so sampling grids avoid the
/// axis itself.
pub fn meridian_reduction(metric: &SpacetimeMetric) -> Result<SpacetimeMetric> {
    let fam = Meridian::new(metric.family().clone())?;
    let b = &metric.bbox;
    let l = b.hi[0].abs().max(b.lo[0].abs());
    let bbox = Bbox::new(vec![-l * 1.0031, b.lo[1]], vec![l, b.hi[1]]);
    Ok(SpacetimeMetric::new(fam).with_bbox(bbox))
}
