//! Null bicharacteristics of the wave operator, null spatial directions and
//! projected forward light cones.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{cross, dot, ClosedCurve, P2};
use crate::error::{Error, Result};
use crate::metric::SpacetimeMetric;
use crate::ode::{self, Control, OdeOptions, Termination};

/// Default merge tolerance for double null roots (on the scaled discriminant).
pub const MERGE_TOL: f64 = 1e-9;

/// `H = Σ g^{jk} ξ_j ξ_k` over `j, k = 0..=n`.
pub fn hamiltonian(metric: &SpacetimeMetric, x: &[f64], xi: &[f64]) -> Result<f64> {
    let g = metric.g_up(x)?;
    Ok(quad(&g, xi))
}

fn quad(g: &DMatrix<f64>, xi: &[f64]) -> f64 {
    let k = g.nrows();
    let mut s = 0.0;
    for i in 0..k {
        for j in 0..k {
            s += g[(i, j)] * xi[i] * xi[j];
        }
    }
    s
}

/// Future-directed `ξ₀` making `(ξ₀, ξ)` null: the root of
/// `g⁰⁰ξ₀² + 2bξ₀ + c = 0` with `g⁰⁰ξ₀ + b = +√(b² − g⁰⁰c) ≥ 0`, so `dx₀/ds ≥ 0`.
pub fn null_xi0(metric: &SpacetimeMetric, x: &[f64], xi: &[f64]) -> Result<f64> {
    let g = metric.g_up(x)?;
    let n = xi.len();
    let g00 = g[(0, 0)];
    let b: f64 = (0..n).map(|j| g[(0, j + 1)] * xi[j]).sum();
    let mut c = 0.0;
    for i in 0..n {
        for j in 0..n {
            c += g[(i + 1, j + 1)] * xi[i] * xi[j];
        }
    }
    let disc = (b * b - g00 * c).max(0.0);
    Ok((-b + disc.sqrt()) / g00)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x0: f64,
    pub x: Vec<f64>,
    pub xi0: f64,
    pub xi: Vec<f64>,
    pub s: f64,
}

impl PhaseState {
    pub fn new(x0: f64, x: Vec<f64>, xi0: f64, xi: Vec<f64>) -> Self {
        PhaseState { x0, x, xi0, xi, s: 0.0 }
    }

    pub fn full_xi(&self) -> Vec<f64> {
        let mut v = vec![self.xi0];
        v.extend_from_slice(&self.xi);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RayTermination {
    Completed,
    Event,
    DomainExit { s: f64, x: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayPath {
    pub states: Vec<PhaseState>,
    /// max |H| along the path
    pub h_drift: f64,
    /// max |ξ₀(s) − ξ₀(0)|
    pub xi0_drift: f64,
    pub termination: RayTermination,
}

impl RayPath {
    pub fn end(&self) -> &PhaseState {
        self.states.last().unwrap()
    }

    /// Error unless the path reached its requested end.
    pub fn require_complete(self) -> Result<Self> {
        match &self.termination {
            RayTermination::DomainExit { s, x } => Err(Error::out_of_domain(
                x,
                format!("ray left the domain at s = {s}"),
            )),
            _ => Ok(self),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RayOptions {
    pub tol: f64,
    /// |H| tolerance for null states; integration aborts beyond 100× this
    pub h_tol: f64,
    /// reject initial states with |H| > h_tol
    pub require_null: bool,
}

impl Default for RayOptions {
    fn default() -> Self {
        RayOptions {
            tol: 1e-10,
            h_tol: 1e-8,
            require_null: true,
        }
    }
}

fn ray_rhs(metric: &SpacetimeMetric, xi0: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let n = metric.n();
    let x = &y[1..=n];
    let g = metric.g_up(x)?;
    let grad = metric.grad_up(x)?;
    let mut xi = vec![xi0];
    xi.extend_from_slice(&y[n + 1..]);
    for j in 0..=n {
        let mut s = 0.0;
        for k in 0..=n {
            s += g[(j, k)] * xi[k];
        }
        dy[j] = 2.0 * s;
    }
    for p in 0..n {
        dy[n + 1 + p] = -quad(&grad[p], &xi);
    }
    Ok(())
}

/// Hamilton's equations for `H`, with `ξ₀` carried as a fixed parameter (its
/// equation is identically zero, so it is exactly conserved).
pub fn integrate_bicharacteristic(
    metric: &SpacetimeMetric,
    state0: &PhaseState,
    s_end: f64,
    opts: &RayOptions,
) -> Result<RayPath> {
    integrate_with_event(metric, state0, s_end, opts, None)
}

/// As [`integrate_bicharacteristic`], stopping where `event(x0, x)` crosses zero.
pub fn integrate_with_event(
    metric: &SpacetimeMetric,
    state0: &PhaseState,
    s_end: f64,
    opts: &RayOptions,
    event: Option<&(dyn Fn(f64, &[f64]) -> f64 + Sync)>,
) -> Result<RayPath> {
    let n = metric.n();
    if state0.x.len() != n || state0.xi.len() != n {
        return Err(Error::InvalidParameter("phase state dimension mismatch".into()));
    }
    let xi0 = state0.xi0;
    let full = state0.full_xi();
    if full.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidParameter("zero covector".into()));
    }
    let h0 = hamiltonian(metric, &state0.x, &full)?;
    if opts.require_null && h0.abs() > opts.h_tol {
        return Err(Error::InvalidParameter(format!(
            "initial state is not null: |H| = {:e}",
            h0.abs()
        )));
    }
    let mut y0 = vec![state0.x0];
    y0.extend_from_slice(&state0.x);
    y0.extend_from_slice(&state0.xi);

    let ode_opts = OdeOptions {
        h_init: 1e-3,
        ..OdeOptions::tol(opts.tol)
    };
    let mut h_drift = h0.abs();
    let mut drift_error: Option<Error> = None;
    let h_limit = 100.0 * opts.h_tol;
    let ham = |y: &[f64]| -> f64 {
        let mut xi = vec![xi0];
        xi.extend_from_slice(&y[n + 1..]);
        metric.g_up(&y[1..=n]).map(|g| quad(&g, &xi)).unwrap_or(f64::NAN)
    };
    let ev_wrapped;
    let ev_ref: Option<&dyn Fn(f64, &[f64]) -> f64> = match event {
        Some(e) => {
            ev_wrapped = move |_s: f64, y: &[f64]| e(y[0], &y[1..=n]);
            Some(&ev_wrapped)
        }
        None => None,
    };
    let out = ode::solve(
        |_s, y, dy| ray_rhs(metric, xi0, y, dy),
        state0.s,
        &y0,
        s_end,
        &ode_opts,
        ev_ref,
        |s, y| {
            let hv = ham(y).abs();
            if hv.is_finite() {
                h_drift = h_drift.max(hv);
            }
            if hv > h_limit {
                drift_error = Some(Error::DriftExceeded { s, drift: hv });
                return Control::Stop("drift".into());
            }
            Control::Continue
        },
    )?;
    if let Some(e) = drift_error {
        return Err(e);
    }
    if let Some(y) = out.y.last() {
        let hv = ham(y).abs();
        if hv.is_finite() {
            h_drift = h_drift.max(hv);
        }
    }
    let states: Vec<PhaseState> = out
        .t
        .iter()
        .zip(&out.y)
        .map(|(s, y)| PhaseState {
            x0: y[0],
            x: y[1..=n].to_vec(),
            xi0,
            xi: y[n + 1..].to_vec(),
            s: *s,
        })
        .collect();
    let termination = match out.termination {
        Termination::Completed | Termination::Stopped(_) => RayTermination::Completed,
        Termination::Event => RayTermination::Event,
        Termination::DomainExit(_) => {
            let last = states.last().unwrap();
            RayTermination::DomainExit {
                s: last.s,
                x: last.x.clone(),
            }
        }
    };
    let xi0_drift = states
        .iter()
        .map(|st| (st.xi0 - xi0).abs())
        .fold(0.0, f64::max);
    Ok(RayPath {
        states,
        h_drift,
        xi0_drift,
        termination,
    })
}

/// Eigen-decomposition of a symmetric 2×2 matrix `[[a, b], [b, c]]`;
/// `l1 ≥ l2`, `cross(e1, e2) = +1`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Eig2 {
    pub l1: f64,
    pub l2: f64,
    pub e1: P2,
    pub e2: P2,
}

pub(crate) fn eig2(a: f64, b: f64, c: f64) -> Eig2 {
    let m = 0.5 * (a + c);
    let d = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (m + d, m - d);
    let e1 = if b == 0.0 {
        if a >= c {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    } else {
        let u = [l1 - c, b];
        let v = [b, l1 - a];
        let w = if dot(u, u) >= dot(v, v) { u } else { v };
        let n = w[0].hypot(w[1]);
        [w[0] / n, w[1] / n]
    };
    Eig2 {
        l1,
        l2,
        e1,
        e2: [-e1[1], e1[0]],
    }
}

/// Null directions of the spatial block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "count", rename_all = "snake_case")]
pub enum NullDirections {
    None,
    /// merged root on the ergosphere (multiplicity two)
    Double { eta: P2 },
    Two { eta: [P2; 2] },
}

impl NullDirections {
    pub fn count(&self) -> usize {
        match self {
            NullDirections::None => 0,
            NullDirections::Double { .. } => 1,
            NullDirections::Two { .. } => 2,
        }
    }
}

fn block2(g: &DMatrix<f64>) -> (f64, f64, f64) {
    (g[(1, 1)], g[(1, 2)], g[(2, 2)])
}

/// Scaled discriminant `−Δ / max|g^{jk}|²` of the spatial binary form.
fn scaled_disc(a: f64, b: f64, c: f64) -> f64 {
    let s = a.abs().max(b.abs()).max(c.abs()).max(1e-300);
    (b * b - a * c) / (s * s)
}

/// Canonical representative of ±η: polar angle in `[0, π)`.
fn canonical(eta: P2) -> P2 {
    let n = eta[0].hypot(eta[1]);
    let u = [eta[0] / n, eta[1] / n];
    if u[1] < 0.0 || (u[1] == 0.0 && u[0] < 0.0) {
        [-u[0], -u[1]]
    } else {
        u
    }
}

fn angle(u: P2) -> f64 {
    u[1].atan2(u[0])
}

/// Unit covectors η with `Σ_{j,k=1,2} g^{jk} η_j η_k = 0`, ordered by polar angle.
pub fn null_spatial_directions(metric: &SpacetimeMetric, x: &[f64]) -> Result<NullDirections> {
    if metric.n() != 2 {
        return Err(Error::InvalidParameter("null spatial directions need n = 2".into()));
    }
    let g = metric.g_up(x)?;
    let (a, b, c) = block2(&g);
    let disc = scaled_disc(a, b, c);
    let e = eig2(a, b, c);
    if disc.abs() <= MERGE_TOL {
        // the kernel direction of the (near-)singular block
        let k = if e.l1.abs() <= e.l2.abs() { e.e1 } else { e.e2 };
        return Ok(NullDirections::Double { eta: canonical(k) });
    }
    if disc < 0.0 {
        return Ok(NullDirections::None);
    }
    let (s1, s2) = (e.l1.sqrt(), (-e.l2).sqrt());
    let p = canonical([s2 * e.e1[0] + s1 * e.e2[0], s2 * e.e1[1] + s1 * e.e2[1]]);
    let q = canonical([s2 * e.e1[0] - s1 * e.e2[0], s2 * e.e1[1] - s1 * e.e2[1]]);
    let mut eta = [p, q];
    eta.sort_by(|u, v| angle(*u).total_cmp(&angle(*v)));
    Ok(NullDirections::Two { eta })
}

/// Timelike test for a direction: `Σ g_{jk} ẋ_j ẋ_k > 0` and `ẋ₀ > 0`.
pub fn timelike_test(metric: &SpacetimeMetric, x: &[f64], velocity: &[f64]) -> Result<bool> {
    if velocity.len() != metric.n() + 1 {
        return Err(Error::InvalidParameter("velocity needs n + 1 components".into()));
    }
    let s = metric.eval(x)?;
    Ok(velocity[0] > 0.0 && quad(&s.g_down, velocity) > 0.0)
}

/// The two boundary directions of the projected forward light cone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeProjections {
    /// clockwise-most boundary of the wedge
    pub right: P2,
    /// counter-clockwise-most boundary
    pub left: P2,
    /// the null covectors generating `right` and `left` (with `ξ₀ = 0`)
    pub eta_right: P2,
    pub eta_left: P2,
    /// x₀ increases along the generating bicharacteristics
    pub x0_increasing: [bool; 2],
    /// on the ergosphere the wedge opens to a half-plane
    pub merged: bool,
    pub delta: f64,
}

/// Projected cone from a metric matrix; `None` outside the ergosphere.
pub(crate) fn cone_from_matrix(g: &DMatrix<f64>, merge_tol: f64) -> Option<ConeProjections> {
    let (a, b, c) = block2(g);
    let w = [g[(0, 1)], g[(0, 2)]];
    let delta = a * c - b * b;
    let disc = scaled_disc(a, b, c);
    let e = eig2(a, b, c);
    if !(e.l1 > 0.0) || disc < -merge_tol {
        return None;
    }
    let merged = disc.abs() <= merge_tol;
    let s1 = e.l1.sqrt();
    let s2 = if e.l2 < 0.0 { (-e.l2).sqrt() } else { 0.0 };
    let comb = |p: f64, q: f64| [p * e.e1[0] + q * e.e2[0], p * e.e1[1] + q * e.e2[1]];
    let eta_p = comb(s2, s1);
    let eta_m = comb(s2, -s1);
    let sp = if dot(w, eta_p) >= 0.0 { 1.0 } else { -1.0 };
    let sm = if dot(w, eta_m) >= 0.0 { 1.0 } else { -1.0 };
    let nrm = (e.l1 + s2 * s2).sqrt();
    let fa = comb(sp * s1 / nrm, -sp * s2 / nrm);
    let fb = comb(sm * s1 / nrm, sm * s2 / nrm);
    let eta_a = [sp * eta_p[0], sp * eta_p[1]];
    let eta_b = [sm * eta_m[0], sm * eta_m[1]];
    let (right, left, eta_right, eta_left) = if sp * sm > 0.0 {
        (fa, fb, eta_a, eta_b)
    } else {
        (fb, fa, eta_b, eta_a)
    };
    debug_assert!(merged || cross(right, left) >= -1e-12);
    Some(ConeProjections {
        right,
        left,
        eta_right,
        eta_left,
        x0_increasing: [true, true],
        merged,
        delta,
    })
}

/// Forward-cone boundary projections at `y` (requires Δ(y) < 0 up to the
/// merge tolerance, where the two boundaries become opposite).
pub fn forward_cone_projections(metric: &SpacetimeMetric, y: &[f64]) -> Result<ConeProjections> {
    if metric.n() != 2 {
        return Err(Error::InvalidParameter("cone projections need n = 2".into()));
    }
    let g = metric.g_up(y)?;
    cone_from_matrix(&g, MERGE_TOL).ok_or_else(|| {
        let (a, b, c) = block2(&g);
        Error::NotInsideErgosphere {
            x: y.to_vec(),
            delta: a * c - b * b,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrappedVerdict {
    AllOutward,
    AllInward,
    Mixed,
}

/// Signs of both cone boundaries against the outward normal at every vertex.
pub fn trapped_condition_check(metric: &SpacetimeMetric, s1: &ClosedCurve) -> Result<TrappedVerdict> {
    let mut out = 0usize;
    let mut inw = 0usize;
    for (p, nm) in s1.vertices.iter().zip(&s1.normals) {
        let g = metric.g_up(p)?;
        let (a, b, c) = block2(&g);
        let delta = a * c - b * b;
        if delta >= 0.0 {
            return Err(Error::NotInsideErgosphere { x: p.to_vec(), delta });
        }
        let cone = cone_from_matrix(&g, 0.0).ok_or_else(|| Error::NotInsideErgosphere {
            x: p.to_vec(),
            delta,
        })?;
        for f in [cone.right, cone.left] {
            let d = dot(f, *nm);
            if d > 0.0 {
                out += 1;
            } else if d < 0.0 {
                inw += 1;
            } else {
                return Ok(TrappedVerdict::Mixed);
            }
        }
    }
    Ok(match (out, inw) {
        (_, 0) => TrappedVerdict::AllOutward,
        (0, _) => TrappedVerdict::AllInward,
        _ => TrappedVerdict::Mixed,
    })
}

/// Endpoints of a fan of forward null rays from one seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FanSlice {
    pub seed: Vec<f64>,
    pub t_end: f64,
    /// spatial endpoint of each ray, ordered by initial covector angle
    pub endpoints: Vec<Vec<f64>>,
    /// whether the ray reached x₀ = t_end (otherwise it left the domain first)
    pub reached: Vec<bool>,
}

impl FanSlice {
    pub fn max_radius(&self, center: &[f64]) -> f64 {
        self.endpoints
            .iter()
            .map(|p| {
                p.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Forward domain of influence, sampled by null rays over covector angles.
pub fn influence_fan(
    metric: &SpacetimeMetric,
    seeds: &[Vec<f64>],
    t_end: f64,
    n_rays: usize,
    opts: &RayOptions,
) -> Result<Vec<FanSlice>> {
    if metric.n() != 2 {
        return Err(Error::InvalidParameter("influence fans are planar (n = 2)".into()));
    }
    seeds
        .iter()
        .map(|seed| {
            let rays: Vec<Result<(Vec<f64>, bool)>> = (0..n_rays)
                .into_par_iter()
                .map(|k| {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / n_rays as f64;
                    let xi = vec![phi.cos(), phi.sin()];
                    let xi0 = null_xi0(metric, seed, &xi)?;
                    let st = PhaseState::new(0.0, seed.clone(), xi0, xi);
                    let ev = move |x0: f64, _x: &[f64]| x0 - t_end;
                    let path = integrate_with_event(metric, &st, 1e6, opts, Some(&ev))?;
                    let reached = path.termination == RayTermination::Event;
                    Ok((path.end().x.clone(), reached))
                })
                .collect();
            let mut endpoints = Vec::with_capacity(n_rays);
            let mut reached = Vec::with_capacity(n_rays);
            for r in rays {
                let (p, ok) = r?;
                endpoints.push(p);
                reached.push(ok);
            }
            Ok(FanSlice {
                seed: seed.clone(),
                t_end,
                endpoints,
                reached,
            })
        })
        .collect()
}

/// Reproducible random null initial states. Positions are uniform in the
/// annulus (shell) `radii[0] ≤ |x| ≤ radii[1]`; for `n = 3` the metric is taken
/// to use axisymmetric `(ρ, z, φ)` coordinates and the polar angle stays 0.2
/// away from the axis. Covectors are uniform on the unit sphere, `ξ₀` null.
pub fn random_null_seeds(
    metric: &SpacetimeMetric,
    count: usize,
    seed: u64,
    radii: [f64; 2],
) -> Result<Vec<PhaseState>> {
    use rand::{Rng, SeedableRng};
    if !(radii[0] > 0.0 && radii[1] >= radii[0]) {
        return Err(Error::InvalidParameter(format!("bad seed radii {radii:?}")));
    }
    let n = metric.n();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = rng.gen_range(radii[0]..=radii[1]);
        let x = match n {
            2 => {
                let th = rng.gen_range(0.0..std::f64::consts::TAU);
                vec![r * th.cos(), r * th.sin()]
            }
            3 => {
                let th = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
                let phi = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                vec![r * th.sin(), r * th.cos(), phi]
            }
            _ => (0..n).map(|_| rng.gen_range(-r..=r)).collect(),
        };
        let xi: Vec<f64> = loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let l = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if (0.1..=1.0).contains(&l) {
                break v.iter().map(|a| a / l).collect();
            }
        };
        if !metric.bbox.contains(&x) {
            continue;
        }
        let xi0 = null_xi0(metric, &x, &xi)?;
        out.push(PhaseState::new(0.0, x, xi0, xi));
    }
    Ok(out)
}
