//! Persistence and loss of horizons under perturbations of the metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{norm, sub, ClosedCurve, P2};
use crate::error::{Error, Result};
use crate::ergosphere::find_ergosphere;
use crate::horizon::{
    choose_inner_curve, classify_horizon, ergosphere_gap, find_limit_cycle, is_characteristic_curve,
    FinderOptions, HoleKind,
};
use crate::metric::{draining_bathtub, meridian_reduction, FourierB, PerturbationFamily, SpacetimeMetric};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchwarzschildTest {
    pub is_schwarzschild_type: bool,
    /// max normalised characteristic residual on the (restricted) ergosphere
    pub residual: f64,
    pub ergosphere: ClosedCurve,
}

/// Does the (restricted) ergosphere itself pass the characteristic test?
/// Axisymmetric `(ρ, z, φ)` metrics are reduced to the meridian plane first.
pub fn schwarzschild_type_test(metric: &SpacetimeMetric, h: f64, tol: f64) -> Result<SchwarzschildTest> {
    let planar = match metric.n() {
        2 => metric.clone(),
        3 => meridian_reduction(metric)?,
        n => {
            return Err(Error::InvalidParameter(format!(
                "Schwarzschild-type test needs a planar or axisymmetric metric, got n = {n}"
            )))
        }
    };
    let ergo = find_ergosphere(&planar, h)?;
    let res = is_characteristic_curve(&planar, &ergo)?;
    Ok(SchwarzschildTest {
        is_schwarzschild_type: res.max <= tol,
        residual: res.max,
        ergosphere: ergo,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonSource {
    /// closed orbit found by the return-map finder
    LimitCycle,
    /// the ergosphere is itself characteristic
    Ergosphere,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EpsOutcome {
    Horizon {
        source: HorizonSource,
        kind: Option<HoleKind>,
        curve: ClosedCurve,
        radius_mean: f64,
        radius_min: f64,
        radius_max: f64,
        /// mean distance from the horizon out to the ergosphere along rays
        ergosphere_gap: f64,
        residual: f64,
    },
    NoHorizon {
        reason: String,
        /// smallest residual over offset copies of the ergosphere
        residual_floor: Option<f64>,
        /// residual of the ε = 0 horizon curve in this member's metric
        base_curve_residual: Option<f64>,
        /// finder failure corroborated by the residual scan
        confirmed: bool,
    },
}

impl EpsOutcome {
    pub fn is_horizon(&self) -> bool {
        matches!(self, EpsOutcome::Horizon { .. })
    }

    pub fn radius_mean(&self) -> Option<f64> {
        match self {
            EpsOutcome::Horizon { radius_mean, .. } => Some(*radius_mean),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StablePersistence,
    UnstableLoss,
    PreservedByConstruction,
    /// no horizon at ε = 0, or a loss the residual scan could not confirm
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityScanResult {
    pub eps: Vec<f64>,
    pub outcomes: Vec<EpsOutcome>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanOptions {
    /// contour grid spacing for the ergosphere
    pub grid_h: f64,
    pub finder: FinderOptions,
    /// radial offsets in `[-offset_range, offset_range]` for the residual scan
    pub offset_range: f64,
    pub n_offsets: usize,
    /// a curve below this residual counts as "nearly characteristic"
    pub near_char_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid_h: 0.02,
            finder: FinderOptions::default(),
            offset_range: 0.1,
            n_offsets: 41,
            near_char_tol: 1e-6,
        }
    }
}

/// Minimum characteristic residual over radial offsets of `curve` about
/// `center`: `(min residual, offset at the minimum)`.
pub fn residual_scan(
    metric: &SpacetimeMetric,
    curve: &ClosedCurve,
    center: P2,
    range: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let n = n.max(2);
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..n {
        let d = -range + 2.0 * range * k as f64 / (n - 1) as f64;
        let pts: Vec<P2> = curve
            .vertices
            .iter()
            .map(|v| {
                let r = sub(*v, center);
                let l = norm(r);
                let s = (l + d) / l;
                [center[0] + s * r[0], center[1] + s * r[1]]
            })
            .collect();
        let c = ClosedCurve::from_periodic_samples(pts, curve.h_curve);
        if let Ok(res) = is_characteristic_curve(metric, &c) {
            if res.max < best.0 {
                best = (res.max, d);
            }
        }
    }
    if best.0.is_finite() {
        Ok(best)
    } else {
        Err(Error::NotFound("no offset curve lies in the metric domain".into()))
    }
}

/// Full horizon pipeline for one metric.
fn horizon_outcome(metric: &SpacetimeMetric, opts: &ScanOptions) -> (EpsOutcome, Option<ClosedCurve>) {
    let ergo = match find_ergosphere(metric, opts.grid_h) {
        Ok(e) => e,
        Err(e) => {
            return (
                EpsOutcome::NoHorizon {
                    reason: format!("ergosphere: {e}"),
                    residual_floor: None,
                    base_curve_residual: None,
                    confirmed: true,
                },
                None,
            )
        }
    };
    let center = ergo.centroid();
    let on_ergo = is_characteristic_curve(metric, &ergo);
    if let Ok(r) = &on_ergo {
        if r.max <= opts.finder.char_tol {
            let kind = classify_horizon(metric, &ergo, opts.finder.char_tol, opts.finder.sign_floor)
                .ok()
                .map(|k| k.0);
            let (m, lo, hi) = ergo.radius_stats(center);
            return (
                EpsOutcome::Horizon {
                    source: HorizonSource::Ergosphere,
                    kind,
                    curve: ergo.clone(),
                    radius_mean: m,
                    radius_min: lo,
                    radius_max: hi,
                    ergosphere_gap: 0.0,
                    residual: r.max,
                },
                Some(ergo),
            );
        }
    }
    let found = choose_inner_curve(metric, &ergo)
        .and_then(|inner| find_limit_cycle(metric, &ergo, &inner, &opts.finder));
    match found {
        Ok(rep) => {
            let gap = ergosphere_gap(metric, &rep.curve, rep.center).map(|g| g.0).unwrap_or(f64::NAN);
            (
                EpsOutcome::Horizon {
                    source: HorizonSource::LimitCycle,
                    kind: Some(rep.kind),
                    radius_mean: rep.radius_mean,
                    radius_min: rep.radius_min,
                    radius_max: rep.radius_max,
                    ergosphere_gap: gap,
                    residual: rep.char_residual,
                    curve: rep.curve,
                },
                Some(ergo),
            )
        }
        Err(e) => {
            let floor = residual_scan(metric, &ergo, center, opts.offset_range, opts.n_offsets)
                .ok()
                .map(|r| r.0);
            (
                EpsOutcome::NoHorizon {
                    reason: e.to_string(),
                    residual_floor: floor,
                    base_curve_residual: None,
                    confirmed: floor.is_some_and(|f| f > opts.near_char_tol),
                },
                Some(ergo),
            )
        }
    }
}

fn verdict_of(outcomes: &[EpsOutcome]) -> Verdict {
    match outcomes.first() {
        Some(o) if o.is_horizon() => {
            let lost: Vec<&EpsOutcome> = outcomes.iter().filter(|o| !o.is_horizon()).collect();
            if lost.is_empty() {
                Verdict::StablePersistence
            } else if lost
                .iter()
                .all(|o| matches!(o, EpsOutcome::NoHorizon { confirmed: true, .. }))
            {
                Verdict::UnstableLoss
            } else {
                Verdict::Inconclusive
            }
        }
        _ => Verdict::Inconclusive,
    }
}

/// Run the horizon pipeline on every member of the family. Failures become
/// `NoHorizon` outcomes; the scan never aborts on them.
pub fn horizon_persistence_scan(
    family: &PerturbationFamily,
    eps: &[f64],
    opts: &ScanOptions,
) -> Result<StabilityScanResult> {
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| a.total_cmp(b));
    eps.dedup();
    if eps.first() != Some(&0.0) {
        return Err(Error::PreconditionFailed("the ε list must include 0".into()));
    }
    let members: Vec<SpacetimeMetric> = eps.iter().map(|e| family.member(*e)).collect::<Result<_>>()?;
    let runs: Vec<(EpsOutcome, Option<ClosedCurve>)> =
        members.par_iter().map(|m| horizon_outcome(m, opts)).collect();
    let base_curve = match &runs[0].0 {
        EpsOutcome::Horizon { curve, .. } => Some(curve.clone()),
        _ => None,
    };
    let outcomes = runs
        .into_iter()
        .zip(&members)
        .map(|((o, _), m)| match o {
            EpsOutcome::NoHorizon {
                reason,
                residual_floor,
                confirmed,
                ..
            } => EpsOutcome::NoHorizon {
                reason,
                residual_floor,
                base_curve_residual: base_curve
                    .as_ref()
                    .and_then(|c| is_characteristic_curve(m, c).ok())
                    .map(|r| r.max),
                confirmed,
            },
            h => h,
        })
        .collect::<Vec<_>>();
    let verdict = verdict_of(&outcomes);
    Ok(StabilityScanResult { eps, outcomes, verdict })
}

/// Bathtub family `A_ε = r(ε)` with tangential part `B_ε`: for `B_ε = 0` the
/// ergosphere `r = A_ε` stays characteristic for every ε.
pub fn preserved_family_demo(
    eps: &[f64],
    radius: &dyn Fn(f64) -> f64,
    tangential: &dyn Fn(f64) -> FourierB,
    base_radius: f64,
    opts: &ScanOptions,
) -> Result<StabilityScanResult> {
    if (radius(0.0) - base_radius).abs() > 1e-12 {
        return Err(Error::PreconditionFailed(format!(
            "schedule starts at r(0) = {} but the base horizon is at {base_radius}",
            radius(0.0)
        )));
    }
    let mut outcomes = Vec::with_capacity(eps.len());
    for &e in eps {
        let a = radius(e);
        let metric = draining_bathtub(a, tangential(e)).with_bbox(crate::metric::Bbox::cube(2, 2.5 * a.abs().max(1.0)));
        let test = schwarzschild_type_test(&metric, opts.grid_h, opts.finder.char_tol)?;
        // the exact circle as a second, contour-independent check
        let circle = ClosedCurve::circle([0.0, 0.0], a.abs(), opts.finder.h_curve);
        let exact = is_characteristic_curve(&metric, &circle)?;
        if !test.is_schwarzschild_type || exact.max > 1e-10 {
            return Err(Error::ConstructionFailed {
                eps: e,
                residual: test.residual.max(exact.max),
            });
        }
        let c = test.ergosphere.centroid();
        let (m, lo, hi) = test.ergosphere.radius_stats(c);
        outcomes.push(EpsOutcome::Horizon {
            source: HorizonSource::Ergosphere,
            kind: None,
            curve: test.ergosphere,
            radius_mean: m,
            radius_min: lo,
            radius_max: hi,
            ergosphere_gap: 0.0,
            residual: test.residual.max(exact.max),
        });
    }
    Ok(StabilityScanResult {
        eps: eps.to_vec(),
        outcomes,
        verdict: Verdict::PreservedByConstruction,
    })
}
