use std::sync::Arc;

use nalgebra::DMatrix;
use num_dual::DualNum;
use serde::{Deserialize, Serialize};

use super::dual::{self, rank_one, DualMetric};
use super::fields::{FlowField, GordonMedium};
use super::{minkowski, Bbox, MetricFamily};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Flat {
    n: usize,
}

impl Flat {
    pub fn new(n: usize) -> Self {
        Flat { n }
    }
}

impl MetricFamily for Flat {
    fn space_dim(&self) -> usize {
        self.n
    }
    fn g_up(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(minkowski(self.n))
    }
    fn grad_up(&self, _x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        let k = self.n + 1;
        Some(Ok(vec![DMatrix::zeros(k, k); self.n]))
    }
    fn default_bbox(&self) -> Bbox {
        Bbox::cube(self.n, 10.0)
    }
    fn label(&self) -> String {
        "flat".into()
    }
}

/// Acoustic metric `(1/(ρc)) [[1, vᵀ], [v, v vᵀ − c² I]]`.
#[derive(Debug, Clone)]
pub struct Acoustic {
    flow: FlowField,
}

impl Acoustic {
    pub fn new(flow: FlowField) -> Self {
        Acoustic { flow }
    }
}

impl MetricFamily for Acoustic {
    fn space_dim(&self) -> usize {
        self.flow.dim
    }

    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.flow.dim;
        let (rho, c) = ((self.flow.rho)(x), (self.flow.c)(x));
        if !(rho > 0.0 && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "density {rho} and sound speed {c} must be positive"
            )));
        }
        let v = (self.flow.v)(x);
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::out_of_domain(x, "flow not finite"));
        }
        let s = 1.0 / (rho * c);
        let mut g = DMatrix::zeros(n + 1, n + 1);
        g[(0, 0)] = s;
        for j in 0..n {
            g[(0, j + 1)] = s * v[j];
            g[(j + 1, 0)] = s * v[j];
            for k in 0..n {
                let d = if j == k { c * c } else { 0.0 };
                g[(j + 1, k + 1)] = s * (v[j] * v[k] - d);
            }
        }
        Ok(g)
    }

    fn default_bbox(&self) -> Bbox {
        Bbox::cube(self.flow.dim, 5.0)
    }

    fn label(&self) -> String {
        "acoustic".into()
    }
}

/// Truncated Fourier series `b0 + b1 cos θ + c1 sin θ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierB {
    #[serde(default)]
    pub b0: f64,
    #[serde(default)]
    pub b1: f64,
    #[serde(default)]
    pub c1: f64,
}

impl FourierB {
    pub fn constant(b0: f64) -> Self {
        FourierB { b0, b1: 0.0, c1: 0.0 }
    }

    pub fn cos(b1: f64) -> Self {
        FourierB { b0: 0.0, b1, c1: 0.0 }
    }

    pub fn add_scaled(&self, o: &FourierB, eps: f64) -> Self {
        FourierB {
            b0: self.b0 + eps * o.b0,
            b1: self.b1 + eps * o.b1,
            c1: self.c1 + eps * o.c1,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.b1 == 0.0 && self.c1 == 0.0
    }

    pub fn at(&self, theta: f64) -> f64 {
        self.b0 + self.b1 * theta.cos() + self.c1 * theta.sin()
    }

    fn eval<D: DualNum<f64> + Copy>(&self, cos: D, sin: D) -> D {
        cos * self.b1 + sin * self.c1 + self.b0
    }
}

/// Draining bathtub `v = (A/r) r̂ + (B(θ)/r) θ̂`, `ρ = c = 1`.
#[derive(Debug, Clone)]
pub struct Bathtub {
    pub a: f64,
    pub b: FourierB,
    pub r_min: f64,
}

impl Bathtub {
    pub fn new(a: f64, b: FourierB) -> Self {
        Bathtub { a, b, r_min: 1e-6 }
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        self
    }

    fn velocity<D: DualNum<f64> + Copy>(&self, x: D, y: D) -> Option<(D, D)> {
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        if !(r.re() > self.r_min) {
            return None;
        }
        let b = self.b.eval(x / r, y / r);
        let vx = (x * self.a - b * y) / r2;
        let vy = (y * self.a + b * x) / r2;
        Some((vx, vy))
    }

    pub fn flow_field(&self) -> FlowField {
        let me = self.clone();
        FlowField::unit(2, move |x| match me.velocity(x[0], x[1]) {
            Some((vx, vy)) => vec![vx, vy],
            None => vec![f64::NAN, f64::NAN],
        })
    }
}

impl DualMetric for Bathtub {
    fn dim(&self) -> usize {
        2
    }

    fn entries<D: DualNum<f64> + Copy>(&self, x: &[D]) -> Result<Vec<D>> {
        let (vx, vy) = self.velocity(x[0], x[1]).ok_or_else(|| {
            Error::out_of_domain(&[x[0].re(), x[1].re()], format!("r <= r_min = {}", self.r_min))
        })?;
        let one = D::from(1.0);
        let v = [one, vx, vy];
        Ok(rank_one(&[0.0, -1.0, -1.0], &[&v]))
    }
}

impl MetricFamily for Bathtub {
    fn space_dim(&self) -> usize {
        2
    }
    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        dual::real(self, x)
    }
    fn grad_up(&self, x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        Some(dual::grad(self, x))
    }
    fn default_bbox(&self) -> Bbox {
        Bbox::cube(2, 5.0)
    }
    fn label(&self) -> String {
        if self.b.is_constant() {
            format!("bathtub(A={}, B={})", self.a, self.b.b0)
        } else {
            format!(
                "bathtub(A={}, B={}+{}cos+{}sin)",
                self.a, self.b.b0, self.b.b1, self.b.c1
            )
        }
    }
}

/// Gordon metric `η + (n² − 1) u uᵀ` for a moving dielectric.
#[derive(Debug, Clone)]
pub struct Gordon {
    medium: GordonMedium,
}

impl Gordon {
    pub fn new(medium: GordonMedium) -> Self {
        Gordon { medium }
    }
}

impl MetricFamily for Gordon {
    fn space_dim(&self) -> usize {
        self.medium.dim
    }

    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.medium.dim;
        let c = self.medium.c;
        let w = (self.medium.w)(x);
        let nr = (self.medium.n_refr)(x);
        if nr < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "refraction index {nr} below 1"
            )));
        }
        let speed = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if speed >= c {
            return Err(Error::SuperluminalFlow { speed, c });
        }
        let u0 = 1.0 / (1.0 - speed * speed / (c * c)).sqrt();
        let mut u = vec![u0];
        u.extend(w.iter().map(|wj| wj / c * u0));
        let k = nr * nr - 1.0;
        let mut g = minkowski(n);
        for i in 0..=n {
            for j in 0..=n {
                g[(i, j)] += k * u[i] * u[j];
            }
        }
        Ok(g)
    }

    fn default_bbox(&self) -> Bbox {
        Bbox::cube(self.medium.dim, 5.0)
    }

    fn label(&self) -> String {
        "gordon".into()
    }
}

/// Oblate radial coordinate of Kerr–Schild space.
pub fn kerr_r(x: f64, y: f64, z: f64, a: f64) -> f64 {
    kerr_r_generic(x * x + y * y + z * z, z, a)
}

/// Same, from cylindrical `(ρ, z)`.
pub fn kerr_r_cyl(rho: f64, z: f64, a: f64) -> f64 {
    kerr_r_generic(rho * rho + z * z, z, a)
}

fn kerr_r_generic<D: DualNum<f64> + Copy>(big_r2: D, z: D, a: f64) -> D {
    let w = big_r2 - a * a;
    let disc = w * w + z * z * (4.0 * a * a);
    ((w + disc.sqrt()) * 0.5).sqrt()
}

fn check_kerr(m: f64, a: f64) -> Result<()> {
    if !(m > 0.0) || !(0.0..=m).contains(&a) {
        return Err(Error::InvalidParameter(format!(
            "Kerr parameters need m > 0 and 0 <= a <= m (m = {m}, a = {a})"
        )));
    }
    Ok(())
}

/// Kerr in Kerr–Schild form: `η^{jk} + f l^j l^k`.
#[derive(Debug, Clone)]
pub struct KerrSchild {
    pub m: f64,
    pub a: f64,
    pub r_floor: f64,
}

impl KerrSchild {
    pub fn new(m: f64, a: f64) -> Result<Self> {
        check_kerr(m, a)?;
        Ok(KerrSchild {
            m,
            a,
            r_floor: 0.05 * m,
        })
    }

    pub fn with_r_floor(mut self, r_floor: f64) -> Self {
        self.r_floor = r_floor;
        self
    }
}

/// `(r, f)` with `f = 2 m r³ / (r⁴ + a² z²)`, or `None` inside the floor.
fn kerr_rf<D: DualNum<f64> + Copy>(r2big: D, z: D, m: f64, a: f64, floor: f64) -> Option<(D, D)> {
    let r = kerr_r_generic(r2big, z, a);
    if !(r.re() >= floor) {
        return None;
    }
    let r2 = r * r;
    let f = r * r2 * (2.0 * m) / (r2 * r2 + z * z * (a * a));
    Some((r, f))
}

impl DualMetric for KerrSchild {
    fn dim(&self) -> usize {
        3
    }

    fn entries<D: DualNum<f64> + Copy>(&self, p: &[D]) -> Result<Vec<D>> {
        let (x, y, z) = (p[0], p[1], p[2]);
        let a = self.a;
        let (r, f) = kerr_rf(x * x + y * y + z * z, z, self.m, a, self.r_floor).ok_or_else(|| {
            Error::out_of_domain(&[x.re(), y.re(), z.re()], "inside ring-singularity floor")
        })?;
        let q = r * r + a * a;
        let sf = f.sqrt();
        let l = [
            -sf,
            (r * x + y * a) / q * sf,
            (r * y - x * a) / q * sf,
            z / r * sf,
        ];
        Ok(rank_one(&[1.0, -1.0, -1.0, -1.0], &[&l]))
    }
}

impl MetricFamily for KerrSchild {
    fn space_dim(&self) -> usize {
        3
    }
    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        dual::real(self, x)
    }
    fn grad_up(&self, x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        Some(dual::grad(self, x))
    }
    fn default_bbox(&self) -> Bbox {
        Bbox::cube(3, 10.0 * self.m)
    }
    fn label(&self) -> String {
        format!("kerr(m={}, a={})", self.m, self.a)
    }
}

/// Kerr in `(ρ, z, φ)`: `ξ^{jk} + f m^j m^k`, `ξ = diag(1, −1, −1, −1/ρ²)`.
#[derive(Debug, Clone)]
pub struct KerrCylindrical {
    pub m: f64,
    pub a: f64,
    pub r_floor: f64,
    pub rho_floor: f64,
}

impl KerrCylindrical {
    pub fn new(m: f64, a: f64) -> Result<Self> {
        check_kerr(m, a)?;
        Ok(KerrCylindrical {
            m,
            a,
            r_floor: 0.05 * m,
            rho_floor: 1e-6,
        })
    }
}

impl DualMetric for KerrCylindrical {
    fn dim(&self) -> usize {
        3
    }

    fn entries<D: DualNum<f64> + Copy>(&self, p: &[D]) -> Result<Vec<D>> {
        let (rho, z) = (p[0], p[1]);
        let a = self.a;
        if !(rho.re() > self.rho_floor) {
            return Err(Error::out_of_domain(
                &[rho.re(), z.re(), p[2].re()],
                "rho below axis floor",
            ));
        }
        let (r, f) = kerr_rf(rho * rho + z * z, z, self.m, a, self.r_floor).ok_or_else(|| {
            Error::out_of_domain(&[rho.re(), z.re(), p[2].re()], "inside ring-singularity floor")
        })?;
        let q = r * r + a * a;
        let sf = f.sqrt();
        let mv = [-sf, r * rho / q * sf, z / r * sf, -(q.recip() * a) * sf];
        let mut e = rank_one(&[1.0, -1.0, -1.0, 0.0], &[&mv]);
        e[15] -= (rho * rho).recip();
        Ok(e)
    }
}

impl MetricFamily for KerrCylindrical {
    fn space_dim(&self) -> usize {
        3
    }
    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        dual::real(self, x)
    }
    fn grad_up(&self, x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        Some(dual::grad(self, x))
    }
    fn default_bbox(&self) -> Bbox {
        let l = 10.0 * self.m;
        Bbox::new(vec![0.0, -l, -std::f64::consts::PI], vec![l, l, std::f64::consts::PI])
    }
    fn label(&self) -> String {
        format!("kerr_cyl(m={}, a={})", self.m, self.a)
    }
}

/// The `(t, ρ, z)` block of Kerr on the whole meridian plane (ρ of either sign),
/// optionally with a tangential acoustic-type perturbation of strength `eps`:
/// `g = diag(1, −1, −1) + V Vᵀ`, `V = √f (−1, m_ρ, m_z) + eps (0, −m_z, m_ρ)/|m|`.
///
/// With `eps = 0` this is the Cartesian Kerr–Schild block at `y = 0`.
#[derive(Debug, Clone)]
pub struct KerrMeridian {
    pub m: f64,
    pub a: f64,
    pub eps: f64,
    pub r_floor: f64,
}

impl KerrMeridian {
    pub fn new(m: f64, a: f64, eps: f64) -> Result<Self> {
        check_kerr(m, a)?;
        Ok(KerrMeridian {
            m,
            a,
            eps,
            r_floor: 0.05 * m,
        })
    }
}

impl DualMetric for KerrMeridian {
    fn dim(&self) -> usize {
        2
    }

    fn entries<D: DualNum<f64> + Copy>(&self, p: &[D]) -> Result<Vec<D>> {
        let (rho, z) = (p[0], p[1]);
        let a = self.a;
        let (r, f) = kerr_rf(rho * rho + z * z, z, self.m, a, self.r_floor).ok_or_else(|| {
            Error::out_of_domain(&[rho.re(), z.re()], "inside ring-singularity floor")
        })?;
        let q = r * r + a * a;
        let (m1, m2) = (r * rho / q, z / r);
        let sf = f.sqrt();
        let mut v = [-sf, m1 * sf, m2 * sf];
        if self.eps != 0.0 {
            let norm = (m1 * m1 + m2 * m2).sqrt();
            v[1] -= m2 / norm * self.eps;
            v[2] += m1 / norm * self.eps;
        }
        Ok(rank_one(&[1.0, -1.0, -1.0], &[&v]))
    }
}

impl MetricFamily for KerrMeridian {
    fn space_dim(&self) -> usize {
        2
    }
    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        dual::real(self, x)
    }
    fn grad_up(&self, x: &[f64]) -> Option<Result<Vec<DMatrix<f64>>>> {
        Some(dual::grad(self, x))
    }
    fn default_bbox(&self) -> Bbox {
        Bbox::cube(2, 5.0 * self.m)
    }
    fn label(&self) -> String {
        if self.eps == 0.0 {
            format!("kerr_meridian(m={}, a={})", self.m, self.a)
        } else {
            format!("kerr_meridian(m={}, a={}, eps={})", self.m, self.a, self.eps)
        }
    }
}

/// Generic reduction of an axisymmetric family given in `(ρ, z, φ)` to its
/// `(t, ρ, z)` block, extended to `ρ < 0` by the reflection `ρ → −ρ`
/// (conjugation with `diag(1, −1, 1)`).
#[derive(Debug, Clone)]
pub struct Meridian {
    base: Arc<dyn MetricFamily>,
    rho_floor: f64,
}

impl Meridian {
    pub fn new(base: Arc<dyn MetricFamily>) -> Result<Self> {
        if base.space_dim() != 3 {
            return Err(Error::InvalidParameter(
                "meridian reduction needs a 3D (rho, z, phi) family".into(),
            ));
        }
        Ok(Meridian {
            base,
            rho_floor: 1e-6,
        })
    }
}

impl MetricFamily for Meridian {
    fn space_dim(&self) -> usize {
        2
    }

    fn g_up(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let (rho, z) = (x[0], x[1]);
        if rho.abs() <= self.rho_floor {
            return Err(Error::out_of_domain(x, "on the symmetry axis"));
        }
        let g = self.base.g_up(&[rho.abs(), z, 0.0])?;
        let mut b = g.view((0, 0), (3, 3)).into_owned();
        if rho < 0.0 {
            for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
                b[(i, j)] = -b[(i, j)];
            }
        }
        Ok(b)
    }

    fn default_bbox(&self) -> Bbox {
        let b = self.base.default_bbox();
        let l = b.hi[0].abs().max(b.lo[0].abs());
        Bbox::new(vec![-l, b.lo[1]], vec![l, b.hi[1]])
    }

    fn label(&self) -> String {
        format!("meridian({})", self.base.label())
    }
}
