//! TOML run configuration shared by every CLI command.
//!
//! Every table rejects unknown keys. [`RunConfig::resolve`] fills in defaults
//! (including the metric's bounding box) so the written-out copy reproduces the
//! run exactly and parses back to an identical value.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::P2;
use crate::error::{Error, Result};
use crate::horizon::FinderOptions;
use crate::metric::{
    self, Bbox, Flow, FourierB, GordonMedium, KerrCylindrical, KerrSchild, PerturbationFamily, SpacetimeMetric,
};
use crate::stability::ScanOptions;
use crate::wavesim::{Disc, WaveConfig, DEFAULT_DISSIPATION};

/// Tangential coefficient `B(θ)`: a number, a `{ b0, b1, c1 }` table, or an
/// expression such as `"0.5 + 0.1*cos(theta)"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BSpec {
    Number(f64),
    Series(Series),
    Expr(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Series {
    pub b0: f64,
    pub b1: f64,
    pub c1: f64,
}

impl Default for BSpec {
    fn default() -> Self {
        BSpec::Number(0.0)
    }
}

impl BSpec {
    pub fn to_fourier(&self) -> Result<FourierB> {
        match self {
            BSpec::Number(b) => Ok(FourierB::constant(*b)),
            BSpec::Series(s) => Ok(FourierB { b0: s.b0, b1: s.b1, c1: s.c1 }),
            BSpec::Expr(e) => parse_fourier(e),
        }
    }

    /// The canonical table form written to resolved configs.
    pub fn canonical(&self) -> Result<BSpec> {
        let f = self.to_fourier()?;
        Ok(BSpec::Series(Series { b0: f.b0, b1: f.b1, c1: f.c1 }))
    }
}

/// Parse `b0 + b1*cos(theta) + c1*sin(theta)` in any order, with optional
/// coefficients and repeated terms.
pub fn parse_fourier(src: &str) -> Result<FourierB> {
    let bad = |why: &str| Error::Config(format!("cannot parse B = {src:?}: {why}"));
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect::<String>().replace('θ', "theta");
    if s.is_empty() {
        return Err(bad("empty expression"));
    }
    // split into signed terms; a sign right after `<number>e` is an exponent
    let mut terms: Vec<(f64, String)> = Vec::new();
    let (mut sign, mut cur) = (1.0, String::new());
    for ch in s.chars() {
        if ch == '+' || ch == '-' {
            let exponent = cur.ends_with(['e', 'E']) && cur[..cur.len() - 1].parse::<f64>().is_ok();
            if !exponent {
                if !cur.is_empty() {
                    terms.push((sign, std::mem::take(&mut cur)));
                    sign = 1.0;
                }
                if ch == '-' {
                    sign = -sign;
                }
                continue;
            }
        }
        cur.push(ch);
    }
    if cur.is_empty() {
        return Err(bad("dangling sign"));
    }
    terms.push((sign, cur));
    let mut out = FourierB::constant(0.0);
    for (sign, term) in terms {
        let (coef, func) = match term.split_once('*') {
            Some((c, f)) => (c, f),
            None if term.starts_with("cos(") || term.starts_with("sin(") => ("1", term.as_str()),
            None => (term.as_str(), ""),
        };
        let c: f64 = coef.parse().map_err(|_| bad(&format!("bad coefficient {coef:?}")))?;
        let c = sign * c;
        match func {
            "" => out.b0 += c,
            "cos(theta)" => out.b1 += c,
            "sin(theta)" => out.c1 += c,
            f => return Err(bad(&format!("unknown term {f:?} (use cos(theta) or sin(theta))"))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSpec {
    #[serde(rename = "A", default)]
    pub a: f64,
    #[serde(rename = "B", default)]
    pub b: BSpec,
}

fn two() -> usize {
    2
}
fn one() -> f64 {
    1.0
}
fn rho_floor() -> f64 {
    1e-6
}
fn r_min() -> f64 {
    1e-6
}

/// `[metric]`: the family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    Flat {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<Bbox>,
    },
    /// uniform flow (non-uniform flows need the library API)
    Acoustic {
        velocity: Vec<f64>,
        #[serde(default = "one")]
        rho: f64,
        #[serde(default = "one")]
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<Bbox>,
    },
    Bathtub {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "B", default)]
        b: BSpec,
        #[serde(default = "r_min")]
        r_min: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<Bbox>,
    },
    /// uniform medium
    Gordon {
        n_refr: f64,
        w: Vec<f64>,
        #[serde(default = "one")]
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<Bbox>,
    },
    /// Kerr–Schild Cartesian form
    Kerr {
        m: f64,
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_floor: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<Bbox>,
    },
    /// `(ρ, z, φ)` form
    KerrCyl {
        m: f64,
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r_floor: Option<f64>,
        #[serde(default = "rho_floor")]
        rho_floor: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<Bbox>,
    },
    /// vortex family `v_ε = v_base + ε δv`; single-metric commands use `eps`
    Perturbation {
        base: VortexSpec,
        delta: VortexSpec,
        eps_max: f64,
        #[serde(default)]
        eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bbox: Option<Bbox>,
    },
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig::Bathtub {
            a: 1.0,
            b: BSpec::Number(0.5),
            r_min: r_min(),
            bbox: None,
        }
    }
}

impl MetricConfig {
    pub fn family_name(&self) -> &'static str {
        match self {
            MetricConfig::Flat { .. } => "flat",
            MetricConfig::Acoustic { .. } => "acoustic",
            MetricConfig::Bathtub { .. } => "bathtub",
            MetricConfig::Gordon { .. } => "gordon",
            MetricConfig::Kerr { .. } => "kerr",
            MetricConfig::KerrCyl { .. } => "kerr_cyl",
            MetricConfig::Perturbation { .. } => "perturbation",
        }
    }

    fn bbox(&self) -> &Option<Bbox> {
        match self {
            MetricConfig::Flat { bbox, .. }
            | MetricConfig::Acoustic { bbox, .. }
            | MetricConfig::Bathtub { bbox, .. }
            | MetricConfig::Gordon { bbox, .. }
            | MetricConfig::Kerr { bbox, .. }
            | MetricConfig::KerrCyl { bbox, .. }
            | MetricConfig::Perturbation { bbox, .. } => bbox,
        }
    }

    fn bbox_mut(&mut self) -> &mut Option<Bbox> {
        match self {
            MetricConfig::Flat { bbox, .. }
            | MetricConfig::Acoustic { bbox, .. }
            | MetricConfig::Bathtub { bbox, .. }
            | MetricConfig::Gordon { bbox, .. }
            | MetricConfig::Kerr { bbox, .. }
            | MetricConfig::KerrCyl { bbox, .. }
            | MetricConfig::Perturbation { bbox, .. } => bbox,
        }
    }

    /// The perturbation family, when this is one.
    pub fn family(&self) -> Result<Option<PerturbationFamily>> {
        match self {
            MetricConfig::Perturbation { base, delta, eps_max, bbox, .. } => {
                let f = metric::perturbation_family(
                    Flow::vortex(base.a, base.b.to_fourier()?),
                    Flow::vortex(delta.a, delta.b.to_fourier()?),
                    *eps_max,
                );
                Ok(Some(match bbox {
                    Some(b) => f.with_bbox(b.clone()),
                    None => f,
                }))
            }
            _ => Ok(None),
        }
    }

    pub fn build(&self) -> Result<SpacetimeMetric> {
        let m = match self {
            MetricConfig::Flat { dim, .. } => {
                if !(1..=3).contains(dim) {
                    return Err(Error::Config(format!("flat dim = {dim} (use 1..=3)")));
                }
                metric::flat(*dim)
            }
            MetricConfig::Acoustic { velocity, rho, c, .. } => {
                if !(*rho > 0.0 && *c > 0.0) || velocity.is_empty() {
                    return Err(Error::Config("acoustic needs rho, c > 0 and a velocity".into()));
                }
                metric::acoustic_metric(metric::FlowField::uniform(velocity.clone(), *rho, *c))
            }
            MetricConfig::Bathtub { a, b, r_min, .. } => {
                SpacetimeMetric::new(metric::Bathtub::new(*a, b.to_fourier()?).with_r_min(*r_min))
            }
            MetricConfig::Gordon { n_refr, w, c, .. } => {
                metric::gordon_metric(GordonMedium::uniform(*n_refr, w.clone(), *c))
            }
            MetricConfig::Kerr { m, a, r_floor, .. } => {
                let mut k = KerrSchild::new(*m, *a)?;
                if let Some(f) = r_floor {
                    k = k.with_r_floor(*f);
                }
                SpacetimeMetric::new(k)
            }
            MetricConfig::KerrCyl { m, a, r_floor, rho_floor, .. } => {
                let mut k = KerrCylindrical::new(*m, *a)?;
                if let Some(f) = r_floor {
                    k.r_floor = *f;
                }
                k.rho_floor = *rho_floor;
                SpacetimeMetric::new(k)
            }
            MetricConfig::Perturbation { eps, .. } => self.family()?.expect("perturbation").member(*eps)?,
        };
        Ok(match self.bbox() {
            Some(b) => {
                if b.dim() != m.n() {
                    return Err(Error::Config(format!("bbox has dimension {}, metric has n = {}", b.dim(), m.n())));
                }
                m.with_bbox(b.clone())
            }
            None => m,
        })
    }
}

/// `[ergosphere]`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErgosphereConfig {
    /// marching-squares cell size
    pub h: f64,
}

impl Default for ErgosphereConfig {
    fn default() -> Self {
        ErgosphereConfig { h: 0.01 }
    }
}

/// `[trapped]`: test the ergosphere scaled about its centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrappedConfig {
    pub scale: f64,
}

impl Default for TrappedConfig {
    fn default() -> Self {
        TrappedConfig { scale: 0.8 }
    }
}

/// `[rays]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RaysConfig {
    /// explicit seed points
    pub seeds: Vec<Vec<f64>>,
    /// covector directions per explicit seed
    pub n_directions: usize,
    /// additional random null states (drawn with the run seed)
    pub random: usize,
    /// radial range of random seed points
    pub random_radii: [f64; 2],
    pub s_end: f64,
    pub tol: f64,
    pub h_tol: f64,
    /// also sample forward influence fans up to this time
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fan_t_end: Option<f64>,
}

impl Default for RaysConfig {
    fn default() -> Self {
        RaysConfig {
            seeds: vec![],
            n_directions: 8,
            random: 0,
            random_radii: [1.5, 3.0],
            s_end: 0.5,
            tol: 1e-10,
            h_tol: 1e-8,
            fan_t_end: None,
        }
    }
}

/// `[kerr]`: closed-form checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KerrConfig {
    pub n_samples: usize,
    /// contour grid spacing in units of m
    pub h: f64,
}

impl Default for KerrConfig {
    fn default() -> Self {
        KerrConfig { n_samples: 200, h: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    /// scan the `[metric]` perturbation family
    Persistence,
    /// bathtub with `A_ε = A + slope·ε`, `B = 0`
    Preserved,
}

/// `[stability]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityConfig {
    pub mode: StabilityMode,
    pub eps: Vec<f64>,
    pub grid_h: f64,
    pub offset_range: f64,
    pub n_offsets: usize,
    pub near_char_tol: f64,
    /// preserved mode: base radius and `dA/dε`
    pub base_radius: f64,
    pub radius_slope: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        let s = ScanOptions::default();
        StabilityConfig {
            mode: StabilityMode::Persistence,
            eps: vec![0.0, 0.05, 0.1, 0.2],
            grid_h: s.grid_h,
            offset_range: s.offset_range,
            n_offsets: s.n_offsets,
            near_char_tol: s.near_char_tol,
            base_radius: 1.0,
            radius_slope: 0.5,
        }
    }
}

impl StabilityConfig {
    pub fn scan_options(&self, finder: &FinderOptions) -> ScanOptions {
        ScanOptions {
            grid_h: self.grid_h,
            finder: *finder,
            offset_range: self.offset_range,
            n_offsets: self.n_offsets,
            near_char_tol: self.near_char_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Containment,
    Boundedness,
}

/// `[wavesim]`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavesimConfig {
    pub experiment: Experiment,
    pub half_width: f64,
    pub h: f64,
    pub t_final: f64,
    /// `None`: placed automatically on the side the horizon kind calls for
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_center: Option<P2>,
    pub pulse_sigma: f64,
    /// radius of the masked core around the horizon centre (0: none)
    pub core_radius: f64,
    pub sponge_width: f64,
    pub sample_every: usize,
    pub iter_tol: f64,
    pub dissipation: f64,
    pub flow_order: u32,
    /// write the final field as a raw snapshot
    pub snapshot: bool,
}

impl Default for WavesimConfig {
    fn default() -> Self {
        WavesimConfig {
            experiment: Experiment::Containment,
            half_width: 2.0,
            h: 1.0 / 64.0,
            t_final: 5.0,
            pulse_center: None,
            pulse_sigma: 0.025,
            core_radius: 0.3,
            sponge_width: 0.2,
            sample_every: 10,
            iter_tol: 1e-10,
            dissipation: DEFAULT_DISSIPATION,
            flow_order: 2,
            snapshot: false,
        }
    }
}

impl WavesimConfig {
    pub fn wave_config(&self, center: P2, pulse_center: P2) -> WaveConfig {
        WaveConfig {
            half_width: self.half_width,
            h: self.h,
            t_final: self.t_final,
            pulse_center,
            pulse_sigma: self.pulse_sigma,
            masks: if self.core_radius > 0.0 {
                vec![Disc { center, radius: self.core_radius }]
            } else {
                vec![]
            },
            sponge_width: self.sponge_width,
            sample_every: self.sample_every,
            iter_tol: self.iter_tol,
            dissipation: self.dissipation,
            flow_order: self.flow_order,
        }
    }
}

/// `[pipeline]`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// run the containment experiment against the found horizon
    pub wavesim: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { wavesim: false }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("artbh-out")
}

/// The whole run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    /// overrides the main tolerance of the command that runs
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub metric: MetricConfig,
    #[serde(default)]
    pub ergosphere: ErgosphereConfig,
    #[serde(default)]
    pub horizon: FinderOptions,
    #[serde(default)]
    pub trapped: TrappedConfig,
    #[serde(default)]
    pub rays: RaysConfig,
    #[serde(default)]
    pub kerr: KerrConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub wavesim: WavesimConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out_dir: default_out(),
            tol: None,
            metric: MetricConfig::default(),
            ergosphere: ErgosphereConfig::default(),
            horizon: FinderOptions::default(),
            trapped: TrappedConfig::default(),
            rays: RaysConfig::default(),
            kerr: KerrConfig::default(),
            stability: StabilityConfig::default(),
            wavesim: WavesimConfig::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Check ranges: tolerances and step sizes positive, counts non-zero.
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive (got {v})")))
            }
        };
        if let Some(t) = self.tol {
            pos("tol", t)?;
        }
        let f = &self.horizon;
        pos("horizon.char_tol", f.char_tol)?;
        pos("horizon.sign_floor", f.sign_floor)?;
        pos("horizon.fixed_point_tol", f.fixed_point_tol)?;
        pos("horizon.ode_tol", f.ode_tol)?;
        pos("horizon.h_curve", f.h_curve)?;
        pos("horizon.ergo_char_tol", f.ergo_char_tol)?;
        pos("horizon.ergo_char_fraction", f.ergo_char_fraction)?;
        pos("ergosphere.h", self.ergosphere.h)?;
        pos("trapped.scale", self.trapped.scale)?;
        pos("rays.tol", self.rays.tol)?;
        pos("rays.h_tol", self.rays.h_tol)?;
        pos("rays.s_end", self.rays.s_end)?;
        if self.rays.random_radii[0] <= 0.0 || self.rays.random_radii[1] < self.rays.random_radii[0] {
            return Err(Error::Config("rays.random_radii must satisfy 0 < lo <= hi".into()));
        }
        pos("kerr.h", self.kerr.h)?;
        pos("stability.grid_h", self.stability.grid_h)?;
        pos("stability.near_char_tol", self.stability.near_char_tol)?;
        pos("stability.offset_range", self.stability.offset_range)?;
        if self.stability.eps.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Config("stability.eps must be finite and >= 0".into()));
        }
        let w = &self.wavesim;
        pos("wavesim.h", w.h)?;
        pos("wavesim.half_width", w.half_width)?;
        pos("wavesim.t_final", w.t_final)?;
        pos("wavesim.pulse_sigma", w.pulse_sigma)?;
        pos("wavesim.iter_tol", w.iter_tol)?;
        pos("wavesim.sponge_width", w.sponge_width)?;
        if w.sample_every == 0 || self.horizon.n_samples < 3 || self.kerr.n_samples == 0 {
            return Err(Error::Config("sample counts must be positive (horizon.n_samples >= 3)".into()));
        }
        if !(0.0..=1.0).contains(&w.dissipation) {
            return Err(Error::Config("wavesim.dissipation must lie in [0, 1]".into()));
        }
        if !matches!(w.flow_order, 2 | 4) {
            return Err(Error::Config("wavesim.flow_order must be 2 or 4".into()));
        }
        if let MetricConfig::Bathtub { b, .. } = &self.metric {
            b.to_fourier()?;
        }
        Ok(())
    }

    /// Fill every default that depends on the metric and normalise `B`, so
    /// that the serialized form pins down the run.
    pub fn resolve(mut self) -> Result<Self> {
        self.validate()?;
        match &mut self.metric {
            MetricConfig::Bathtub { b, .. } => *b = b.canonical()?,
            MetricConfig::Perturbation { base, delta, .. } => {
                base.b = base.b.canonical()?;
                delta.b = delta.b.canonical()?;
            }
            _ => {}
        }
        let bbox = self.metric.build()?.bbox.clone();
        *self.metric.bbox_mut() = Some(bbox);
        Ok(self)
    }
}
