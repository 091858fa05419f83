//! Event horizons as limit cycles of the characteristic direction fields.
//!
//! Inside the ergosphere the spatial block of `g^{jk}` is indefinite and has
//! two null covector families; rotating them by 90° gives two unit direction
//! fields `f⁺`, `f⁻` that coincide on the ergosphere. A closed characteristic
//! curve is a closed orbit of one of them, located here with a Poincaré
//! return map on a radial section.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bicharacteristics::{cone_from_matrix, trapped_condition_check, TrappedVerdict, MERGE_TOL};
use crate::curve::{cross, dot, norm, sub, ClosedCurve, P2};
use crate::error::{Error, Result};
use crate::metric::{spatial_block, SpacetimeMetric};
use crate::ode::{self, Control, OdeOptions, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Plus,
    Minus,
}

/// Unit characteristic direction field.
///
/// `f⁺` is the counter-clockwise boundary of the projected forward cone, so
/// σ and x₀ increase together along it; `f⁻` is the reversed clockwise
/// boundary. Both equal `R₉₀ c/|c|` (c the covariant `(g₀₁, g₀₂)`) on the
/// ergosphere.
#[derive(Debug, Clone)]
pub struct CharacteristicField {
    pub family: Family,
    metric: SpacetimeMetric,
    pub merge_tol: f64,
}

impl CharacteristicField {
    pub fn new(metric: &SpacetimeMetric, family: Family) -> Self {
        CharacteristicField {
            family,
            metric: metric.clone(),
            merge_tol: MERGE_TOL,
        }
    }

    pub fn metric(&self) -> &SpacetimeMetric {
        &self.metric
    }

    /// True when x₀ increases with σ along the field.
    pub fn forward_in_time(&self) -> bool {
        self.family == Family::Plus
    }

    pub fn eval(&self, p: P2) -> Result<P2> {
        let g = self.metric.g_up(&p)?;
        let cone = cone_from_matrix(&g, self.merge_tol).ok_or_else(|| {
            let b = spatial_block(&g);
            Error::OutsideErgosphere {
                x: p.to_vec(),
                delta: b.determinant(),
            }
        })?;
        Ok(match self.family {
            Family::Plus => cone.left,
            Family::Minus => [-cone.right[0], -cone.right[1]],
        })
    }

    /// Matching null covector (orthogonal to the direction).
    pub fn covector(&self, p: P2) -> Result<P2> {
        let g = self.metric.g_up(&p)?;
        let cone = cone_from_matrix(&g, self.merge_tol).ok_or_else(|| Error::OutsideErgosphere {
            x: p.to_vec(),
            delta: spatial_block(&g).determinant(),
        })?;
        Ok(match self.family {
            Family::Plus => cone.eta_left,
            Family::Minus => cone.eta_right,
        })
    }
}

/// Both fields, after checking the ergosphere is not characteristic.
pub fn characteristic_fields(
    metric: &SpacetimeMetric,
    ergosphere: &ClosedCurve,
) -> Result<(CharacteristicField, CharacteristicField)> {
    if let ErgoCheck::CharacteristicSomewhere { fraction, min_form, .. } =
        ergosphere_noncharacteristic_check(metric, ergosphere, 1e-8)?
    {
        return Err(Error::ErgosphereCharacteristic { fraction, min_form });
    }
    Ok((
        CharacteristicField::new(metric, Family::Plus),
        CharacteristicField::new(metric, Family::Minus),
    ))
}

/// `|νᵀ G ν| / (‖G‖₂ |ν|²)` with `G` the spatial block.
pub fn normalized_form(metric: &SpacetimeMetric, p: P2, nu: P2) -> Result<f64> {
    let g = metric.g_up(&p)?;
    let (a, b, c) = (g[(1, 1)], g[(1, 2)], g[(2, 2)]);
    let q = a * nu[0] * nu[0] + 2.0 * b * nu[0] * nu[1] + c * nu[1] * nu[1];
    let m = 0.5 * (a + c);
    let d = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let spec = (m + d).abs().max((m - d).abs());
    Ok(q.abs() / (spec * dot(nu, nu)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub mean: f64,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max <= tol
    }
}

/// Normalised characteristic residual of a curve (using its normals).
pub fn is_characteristic_curve(metric: &SpacetimeMetric, curve: &ClosedCurve) -> Result<ResidualReport> {
    let vals: Vec<f64> = curve
        .vertices
        .iter()
        .zip(&curve.normals)
        .map(|(p, nu)| normalized_form(metric, *p, *nu))
        .collect::<Result<_>>()?;
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(ResidualReport { max, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ErgoCheck {
    NonCharacteristic {
        min_form: f64,
    },
    CharacteristicSomewhere {
        points: Vec<P2>,
        /// fraction of vertices where the form is below tolerance
        fraction: f64,
        min_form: f64,
    },
}

impl ErgoCheck {
    pub fn min_form(&self) -> f64 {
        match self {
            ErgoCheck::NonCharacteristic { min_form } => *min_form,
            ErgoCheck::CharacteristicSomewhere { min_form, .. } => *min_form,
        }
    }
}

/// The characteristic form on the ergosphere's normals, vertex by vertex.
pub fn ergosphere_noncharacteristic_check(
    metric: &SpacetimeMetric,
    ergo: &ClosedCurve,
    tol: f64,
) -> Result<ErgoCheck> {
    let forms: Vec<f64> = ergo
        .vertices
        .iter()
        .zip(&ergo.normals)
        .map(|(p, nu)| normalized_form(metric, *p, *nu))
        .collect::<Result<_>>()?;
    let min_form = forms.iter().cloned().fold(f64::INFINITY, f64::min);
    let points: Vec<P2> = ergo
        .vertices
        .iter()
        .zip(&forms)
        .filter(|(_, f)| **f <= tol)
        .map(|(p, _)| *p)
        .collect();
    if points.is_empty() {
        Ok(ErgoCheck::NonCharacteristic { min_form })
    } else {
        let fraction = points.len() as f64 / forms.len() as f64;
        Ok(ErgoCheck::CharacteristicSomewhere {
            points,
            fraction,
            min_form,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleKind {
    BlackHole,
    WhiteHole,
}

/// Sign of `Σ_j g^{j0} ν_j` along a characteristic curve.
pub fn classify_horizon(
    metric: &SpacetimeMetric,
    curve: &ClosedCurve,
    char_tol: f64,
    sign_floor: f64,
) -> Result<(HoleKind, f64)> {
    let res = is_characteristic_curve(metric, curve)?;
    if !res.passes(char_tol) {
        return Err(Error::NotCharacteristic { residual: res.max });
    }
    let (mut pos, mut neg) = (0usize, 0usize);
    let mut min_abs = f64::INFINITY;
    for (p, nu) in curve.vertices.iter().zip(&curve.normals) {
        let g = metric.g_up(p)?;
        let s = g[(1, 0)] * nu[0] + g[(2, 0)] * nu[1];
        min_abs = min_abs.min(s.abs());
        if s > sign_floor {
            pos += 1;
        } else if s < -sign_floor {
            neg += 1;
        }
    }
    let total = curve.len();
    if pos == total {
        Ok((HoleKind::WhiteHole, min_abs))
    } else if neg == total {
        Ok((HoleKind::BlackHole, min_abs))
    } else {
        Err(Error::IndefiniteSign {
            min_abs,
            positive: pos,
            negative: neg,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStop {
    Completed,
    ErgosphereContact,
    InnerContact,
    Returned,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowPath {
    pub sigma: Vec<f64>,
    pub points: Vec<P2>,
    pub stop: FlowStop,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    pub tol: f64,
    pub h_max: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tol: 1e-12,
            h_max: 0.05,
        }
    }
}

/// Integrate `dx/dσ = f(x)` from `y0` to `σ_end` (negative for backward).
/// Stops on ergosphere contact, on entering `inner`, or at `σ_end`.
pub fn flow_field(
    field: &CharacteristicField,
    y0: P2,
    sigma_end: f64,
    inner: Option<&ClosedCurve>,
    opts: &FlowOptions,
) -> Result<FlowPath> {
    run_flow(field, y0, sigma_end, inner, None, opts).map(|(p, _)| p)
}

/// Shared driver: optional winding event about `center` (one full turn).
fn run_flow(
    field: &CharacteristicField,
    y0: P2,
    sigma_end: f64,
    inner: Option<&ClosedCurve>,
    winding_center: Option<P2>,
    opts: &FlowOptions,
) -> Result<(FlowPath, Option<Error>)> {
    let c = winding_center.unwrap_or([0.0, 0.0]);
    let rhs = |_s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let f = field.eval([y[0], y[1]])?;
        dy[0] = f[0];
        dy[1] = f[1];
        let r = [y[0] - c[0], y[1] - c[1]];
        dy[2] = cross(r, f) / dot(r, r);
        Ok(())
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let event = move |_s: f64, y: &[f64]| (y[2] - two_pi) * (y[2] + two_pi);
    let ode_opts = OdeOptions {
        h_init: 1e-3,
        h_max: opts.h_max,
        ..OdeOptions::tol(opts.tol)
    };
    let mut prev: Option<P2> = field.eval(y0).ok();
    let mut flip: Option<Error> = None;
    let out = ode::solve(
        rhs,
        0.0,
        &[y0[0], y0[1], 0.0],
        sigma_end,
        &ode_opts,
        if winding_center.is_some() {
            Some(&event as &dyn Fn(f64, &[f64]) -> f64)
        } else {
            None
        },
        |s, y| {
            let p = [y[0], y[1]];
            if let Some(inn) = inner {
                if inn.contains(p) {
                    return Control::Stop("inner".into());
                }
            }
            if let (Some(pf), Ok(f)) = (prev, field.eval(p)) {
                if dot(pf, f) < 0.0 {
                    flip = Some(Error::BranchFlip { sigma: s });
                    return Control::Stop("flip".into());
                }
                prev = Some(f);
            }
            Control::Continue
        },
    )?;
    let stop = match &out.termination {
        Termination::Completed => FlowStop::Completed,
        Termination::Event => FlowStop::Returned,
        Termination::Stopped(why) if why == "inner" => FlowStop::InnerContact,
        Termination::Stopped(_) => FlowStop::Completed,
        Termination::DomainExit(_) => FlowStop::ErgosphereContact,
    };
    let path = FlowPath {
        sigma: out.t.clone(),
        points: out.y.iter().map(|y| [y[0], y[1]]).collect(),
        stop,
    };
    Ok((path, flip))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonLabel {
    /// `{S₀ = 0} × ℝ` in the plane
    Planar,
    /// `{S₀(ρ, z) = 0} × S¹ × ℝ` for an axisymmetric metric
    Rotating,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorizonReport {
    pub label: HorizonLabel,
    pub kind: HoleKind,
    pub curve: ClosedCurve,
    pub char_residual: f64,
    pub char_residual_mean: f64,
    /// min over the curve of |Σ_j g^{j0} ν_j|
    pub sign_value: f64,
    pub return_map_slope: f64,
    pub family: Family,
    /// +1 when the cycle was found flowing forward in σ
    pub sigma_direction: f64,
    pub center: P2,
    pub section_angle: f64,
    pub fixed_point: P2,
    pub period: f64,
    pub radius_mean: f64,
    pub radius_min: f64,
    pub radius_max: f64,
    /// every sign-change bracket of P(r) − r on the section (outermost first)
    pub brackets: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FinderOptions {
    pub section_angle: f64,
    pub n_samples: usize,
    pub char_tol: f64,
    pub sign_floor: f64,
    pub fixed_point_tol: f64,
    pub ode_tol: f64,
    /// vertex spacing of the emitted curve
    pub h_curve: f64,
    /// a point of the ergosphere counts as characteristic below this form value
    pub ergo_char_tol: f64,
    /// refuse (Schwarzschild-type) when at least this fraction is characteristic
    pub ergo_char_fraction: f64,
}

impl Default for FinderOptions {
    fn default() -> Self {
        FinderOptions {
            section_angle: 0.0,
            n_samples: 9,
            char_tol: 1e-8,
            sign_floor: 1e-10,
            fixed_point_tol: 1e-10,
            ode_tol: 1e-12,
            h_curve: 5e-3,
            ergo_char_tol: 1e-8,
            ergo_char_fraction: 0.5,
        }
    }
}

/// Largest `t > 0` with `c + t·u` on the polyline.
fn ray_hit(curve: &ClosedCurve, c: P2, u: P2) -> Option<f64> {
    let v = &curve.vertices;
    let n = v.len();
    let mut best: Option<f64> = None;
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let e = sub(b, a);
        let den = cross(u, e);
        if den == 0.0 {
            continue;
        }
        let ac = sub(a, c);
        let t = cross(ac, e) / den;
        let s = cross(ac, u) / den;
        if t > 0.0 && (0.0..1.0).contains(&s) {
            best = Some(best.map_or(t, |b: f64| b.max(t)));
        }
    }
    best
}

struct Section<'a> {
    field: CharacteristicField,
    dir: f64,
    center: P2,
    u: P2,
    inner: &'a ClosedCurve,
    sigma_max: f64,
    flow: FlowOptions,
}

impl Section<'_> {
    fn point(&self, r: f64) -> P2 {
        [self.center[0] + r * self.u[0], self.center[1] + r * self.u[1]]
    }

    /// First return to the section after one full winding, or `None` if the
    /// orbit leaves the annulus first.
    fn ret(&self, r: f64) -> Option<(f64, f64)> {
        let (path, flip) = run_flow(
            &self.field,
            self.point(r),
            self.dir * self.sigma_max,
            Some(self.inner),
            Some(self.center),
            &self.flow,
        )
        .ok()?;
        if flip.is_some() || path.stop != FlowStop::Returned {
            return None;
        }
        let end = *path.points.last().unwrap();
        let rr = dot(sub(end, self.center), self.u);
        Some((rr, path.sigma.last().unwrap().abs()))
    }
}

/// Locate the limit-cycle event horizon between `inner` and the ergosphere.
pub fn find_limit_cycle(
    metric: &SpacetimeMetric,
    outer: &ClosedCurve,
    inner: &ClosedCurve,
    opts: &FinderOptions,
) -> Result<HorizonReport> {
    if metric.n() != 2 {
        return Err(Error::InvalidParameter("limit-cycle finder is planar (n = 2)".into()));
    }
    if let ErgoCheck::CharacteristicSomewhere { fraction, min_form, .. } =
        ergosphere_noncharacteristic_check(metric, outer, opts.ergo_char_tol)?
    {
        if fraction >= opts.ergo_char_fraction {
            return Err(Error::ErgosphereCharacteristic { fraction, min_form });
        }
    }
    match trapped_condition_check(metric, inner)? {
        TrappedVerdict::Mixed => {
            return Err(Error::PreconditionFailed(
                "forward cones on the inner curve point both ways (not trapped)".into(),
            ))
        }
        TrappedVerdict::AllOutward | TrappedVerdict::AllInward => {}
    }

    let center = inner.centroid();
    let u = [opts.section_angle.cos(), opts.section_angle.sin()];
    let r_in = ray_hit(inner, center, u)
        .ok_or_else(|| Error::PreconditionFailed("section misses the inner curve".into()))?;
    let r_out = ray_hit(outer, center, u)
        .ok_or_else(|| Error::PreconditionFailed("section misses the ergosphere".into()))?;
    if !(r_out > r_in) {
        return Err(Error::PreconditionFailed(
            "inner curve is not inside the ergosphere along the section".into(),
        ));
    }
    let width = r_out - r_in;
    let delta = 1e-3 * width;
    let (lo, hi) = (r_in + delta, r_out - delta);
    let flow = FlowOptions {
        tol: opts.ode_tol,
        h_max: (0.25 * width).min(0.05 * outer.length()),
    };
    let sigma_max = 50.0 * outer.length();
    let ns = opts.n_samples.max(3);
    let samples: Vec<f64> = (0..ns)
        .map(|k| lo + (hi - lo) * k as f64 / (ns - 1) as f64)
        .collect();

    let mut chosen: Option<(Section, Vec<(f64, f64)>)> = None;
    for family in [Family::Plus, Family::Minus] {
        for dir in [1.0, -1.0] {
            let sec = Section {
                field: CharacteristicField::new(metric, family),
                dir,
                center,
                u,
                inner,
                sigma_max,
                flow,
            };
            let vals: Vec<Option<f64>> = samples
                .par_iter()
                .map(|&r| sec.ret(r).map(|(p, _)| p - r))
                .collect();
            let mut brackets = Vec::new();
            for k in (0..ns - 1).rev() {
                if let (Some(a), Some(b)) = (vals[k], vals[k + 1]) {
                    if a == 0.0 || (a < 0.0) != (b < 0.0) {
                        brackets.push((samples[k], samples[k + 1]));
                    }
                }
            }
            if !brackets.is_empty() {
                chosen = Some((sec, brackets));
                break;
            }
        }
        if chosen.is_some() {
            break;
        }
    }
    let (sec, brackets) = chosen.ok_or_else(|| {
        Error::NoSignChange(format!(
            "P(r) - r keeps one sign (or is undefined) on r in [{lo:.6}, {hi:.6}] for both families"
        ))
    })?;

    // bisection on the outermost bracket
    let g = |r: f64| sec.ret(r).map(|(p, _)| p - r);
    let (mut a, mut b) = brackets[0];
    let mut ga = g(a).ok_or_else(|| Error::NoSignChange("return map lost at bracket end".into()))?;
    while b - a > opts.fixed_point_tol {
        let m = 0.5 * (a + b);
        let gm = match g(m) {
            Some(v) => v,
            None => {
                return Err(Error::NoSignChange(format!(
                    "return map undefined at r = {m} inside a bracket"
                )))
            }
        };
        if gm == 0.0 {
            a = m;
            b = m;
            break;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let r_star = 0.5 * (a + b);
    let p_star = sec.point(r_star);
    let (_, period) = sec
        .ret(r_star)
        .ok_or_else(|| Error::NoSignChange("fixed point does not return".into()))?;

    let d = 1e-4 * width;
    let slope = match (sec.ret(r_star + d), sec.ret(r_star - d)) {
        (Some((pp, _)), Some((pm, _))) => (pp - pm) / (2.0 * d),
        _ => f64::NAN,
    };

    let curve = trace_cycle(&sec, p_star, period, opts.h_curve)?;
    let res = is_characteristic_curve(metric, &curve)?;
    let (kind, sign_value) = classify_horizon(metric, &curve, opts.char_tol, opts.sign_floor)?;
    let (radius_mean, radius_min, radius_max) = curve.radius_stats(center);
    Ok(HorizonReport {
        label: HorizonLabel::Planar,
        kind,
        char_residual: res.max,
        char_residual_mean: res.mean,
        sign_value,
        return_map_slope: slope,
        family: sec.field.family,
        sigma_direction: sec.dir,
        center,
        section_angle: opts.section_angle,
        fixed_point: p_star,
        period,
        radius_mean,
        radius_min,
        radius_max,
        brackets,
        curve,
    })
}

/// One revolution from `p0` sampled at uniform σ spacing.
fn trace_cycle(sec: &Section, p0: P2, period: f64, h_curve: f64) -> Result<ClosedCurve> {
    let n = ((period / h_curve).ceil() as usize).max(16);
    let ds = period / n as f64;
    let f = &sec.field;
    let dir = sec.dir;
    let ode_opts = OdeOptions {
        h_init: ds.min(1e-3),
        h_max: ds,
        ..OdeOptions::tol(sec.flow.tol)
    };
    let mut pts = Vec::with_capacity(n);
    let mut p = p0;
    for _ in 0..n {
        pts.push(p);
        let out = ode::solve(
            |_s, y, dy| {
                let v = f.eval([y[0], y[1]])?;
                dy[0] = v[0];
                dy[1] = v[1];
                Ok(())
            },
            0.0,
            &p,
            dir * ds,
            &ode_opts,
            None,
            |_, _| Control::Continue,
        )?;
        if let Termination::DomainExit(e) = out.termination {
            return Err(e);
        }
        let y = out.y.last().unwrap();
        p = [y[0], y[1]];
    }
    let closure = norm(sub(p, p0));
    if closure > 1e-6 {
        return Err(Error::NoSignChange(format!(
            "traced cycle does not close (gap {closure:e})"
        )));
    }
    Ok(ClosedCurve::from_periodic_samples(pts, h_curve))
}

/// The planar machinery on the meridian plane of an axisymmetric metric.
pub fn rotating_horizon(
    meridian: &SpacetimeMetric,
    outer: &ClosedCurve,
    inner: &ClosedCurve,
    opts: &FinderOptions,
) -> Result<HorizonReport> {
    let mut rep = find_limit_cycle(meridian, outer, inner, opts)?;
    rep.label = HorizonLabel::Rotating;
    Ok(rep)
}

/// An inner curve for the finder: the ergosphere shrunk about its centroid,
/// trying a few factors until the forward-cone test is one-sided.
pub fn choose_inner_curve(metric: &SpacetimeMetric, ergo: &ClosedCurve) -> Result<ClosedCurve> {
    let c = ergo.centroid();
    for f in [0.8, 0.6, 0.4, 0.9, 0.3] {
        let cand = ergo.scaled(c, f);
        if let Ok(TrappedVerdict::AllInward | TrappedVerdict::AllOutward) =
            trapped_condition_check(metric, &cand)
        {
            return Ok(cand);
        }
    }
    Err(Error::PreconditionFailed(
        "no shrunken copy of the ergosphere satisfies the trapped-region condition".into(),
    ))
}

/// Distances from the horizon to the ergosphere along rays from `center`:
/// `(mean, min, max)` of `|x_ergo| − |x_horizon|`, with the ergosphere point
/// found by root-finding Δ on each ray.
pub fn ergosphere_gap(metric: &SpacetimeMetric, horizon: &ClosedCurve, center: P2) -> Result<(f64, f64, f64)> {
    let delta = |p: P2| crate::ergosphere::delta(metric, &p);
    let mut gaps = Vec::with_capacity(horizon.len());
    for v in &horizon.vertices {
        let d = sub(*v, center);
        let r0 = norm(d);
        let u = [d[0] / r0, d[1] / r0];
        let at = |r: f64| [center[0] + r * u[0], center[1] + r * u[1]];
        // march outward to the first sign change, then bisect
        let mut a = r0;
        let mut fa = delta(at(a))?;
        let step = 0.01 * r0.max(1e-3);
        let mut b = a;
        let mut found = false;
        for _ in 0..10_000 {
            b = a + step;
            let fb = delta(at(b))?;
            if (fb >= 0.0) != (fa >= 0.0) {
                found = true;
                break;
            }
            a = b;
            fa = fb;
        }
        if !found {
            return Err(Error::NotFound("no ergosphere crossing outside the horizon".into()));
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = delta(at(m))?;
            if (fm >= 0.0) == (fa >= 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
            if b - a < 1e-15 * b {
                break;
            }
        }
        gaps.push(0.5 * (a + b) - r0);
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let min = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((mean, min, max))
}
