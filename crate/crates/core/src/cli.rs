//! The `artbh` command line: config resolution, stage orchestration and
//! artifacts. One command per process; every run writes the resolved config,
//! a `summary.json` and prints the same summary as one JSON line on stdout.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bicharacteristics::{
    influence_fan, integrate_bicharacteristic, null_xi0, random_null_seeds, trapped_condition_check, PhaseState,
    RayOptions, RayPath, RayTermination,
};
use crate::config::{Experiment, MetricConfig, RunConfig, StabilityMode, WavesimConfig};
use crate::curve::{ClosedCurve, P2};
use crate::ergosphere::{self, find_ergosphere, kerr_verify};
use crate::error::{Error, Result};
use crate::horizon::{
    choose_inner_curve, classify_horizon, ergosphere_gap, ergosphere_noncharacteristic_check, find_limit_cycle,
    is_characteristic_curve, normalized_form, ErgoCheck, HoleKind, HorizonReport,
};
use crate::io::{self, Svg};
use crate::metric::{kerr_meridian, meridian_reduction, FourierB, SpacetimeMetric};
use crate::stability::{
    horizon_persistence_scan, preserved_family_demo, residual_scan, EpsOutcome, HorizonSource, StabilityScanResult,
};
use crate::wavesim::{boundedness_probe, containment_experiment, gaussian_support, pulse_side_for, write_snapshot, PulseSide};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(name = "artbh", version, about = "Ergospheres, event horizons and wave containment in moving media")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration (defaults: bathtub A = 1, B = 0.5)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// output directory (overrides `out_dir`)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// main tolerance of the command
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol: Option<f64>,
    /// grid resolution: spacing 1/n for contours and the wave grid
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<u32>,
    /// no progress messages on stderr
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Subcommand)]
pub enum Command {
    /// extract the ergosphere
    Ergosphere,
    /// locate and classify the event horizon
    Horizon,
    /// forward-cone test on a shrunken ergosphere
    Trapped,
    /// integrate null bicharacteristics
    Rays,
    /// check the Kerr closed forms
    KerrVerify {
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
    },
    /// horizon persistence under a perturbation family
    Stability,
    /// wave containment / boundedness against the found horizon
    Wavesim,
    /// ergosphere → horizon → classification (→ wave containment)
    Pipeline,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ergosphere => "ergosphere",
            Command::Horizon => "horizon",
            Command::Trapped => "trapped",
            Command::Rays => "rays",
            Command::KerrVerify { .. } => "kerr-verify",
            Command::Stability => "stability",
            Command::Wavesim => "wavesim",
            Command::Pipeline => "pipeline",
        }
    }
}

/// A failed stage: the error plus where and what it means.
#[derive(Debug)]
struct Failure {
    stage: &'static str,
    context: Option<String>,
    error: Error,
}

impl Failure {
    fn message(&self) -> String {
        match &self.context {
            Some(c) => format!("{c}: {}", self.error),
            None => self.error.to_string(),
        }
    }
}

trait At<T> {
    fn at(self, stage: &'static str) -> std::result::Result<T, Failure>;
}

impl<T> At<T> for Result<T> {
    fn at(self, stage: &'static str) -> std::result::Result<T, Failure> {
        self.map_err(|error| Failure {
            stage,
            context: None,
            error,
        })
    }
}

type Staged<T> = std::result::Result<T, Failure>;

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
    quiet: bool,
    stages: Vec<Value>,
}

impl Ctx {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("artbh: {msg}");
        }
    }

    fn stage(&mut self, name: &str, status: &str, detail: Value) {
        self.note(&format!("{name}: {status}"));
        let mut m = Map::new();
        m.insert("stage".into(), json!(name));
        m.insert("status".into(), json!(status));
        if let Value::Object(d) = detail {
            m.extend(d);
        }
        self.stages.push(Value::Object(m));
    }

    fn write(&self, name: &str, text: &str) -> Staged<()> {
        io::write_text(&self.out.join(name), text).at("output")
    }

    fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Staged<()> {
        io::write_json(&self.out.join(name), v).at("output")
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    execute(&cli)
}

fn summary_line(command: &str, status: &str, fields: Map<String, Value>) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("status".into(), json!(status));
    m.extend(fields);
    Value::Object(m)
}

fn emit(summary: &Value, out: Option<&Path>) -> i32 {
    println!("{}", serde_json::to_string(summary).unwrap_or_else(|_| "{}".into()));
    if let Some(dir) = out {
        if let Err(e) = io::write_json(&dir.join(SUMMARY), summary) {
            eprintln!("artbh: cannot write summary: {e}");
            return EXIT_INTERNAL;
        }
    }
    EXIT_OK
}

/// Run a parsed command line.
pub fn execute(cli: &Cli) -> i32 {
    let name = cli.command.name();
    let fail = |stage: &str, err: &Error, out: Option<&Path>| {
        let msg = err.to_string();
        if !cli.quiet {
            eprintln!("artbh: {stage}: {msg}");
        }
        let mut f = Map::new();
        f.insert("stage".into(), json!(stage));
        f.insert("error".into(), json!(msg));
        let code = if err.is_precondition() { EXIT_FAILED } else { EXIT_INTERNAL };
        let c = emit(&summary_line(name, "failed", f), out);
        if c != EXIT_OK {
            c
        } else {
            code
        }
    };
    if let Err(e) = crate::parallel::init_global_pool() {
        return fail("setup", &e, None);
    }
    let cfg = match prepare(cli) {
        Ok(c) => c,
        Err(e) => return fail("config", &e, None),
    };
    let out = cfg.out_dir.clone();
    let resolved = cfg.to_toml().and_then(|t| io::write_text(&out.join(RESOLVED_CONFIG), &t));
    if let Err(e) = resolved {
        return fail("output", &e, None);
    }
    let mut ctx = Ctx {
        cfg,
        out: out.clone(),
        quiet: cli.quiet,
        stages: vec![],
    };
    let result = match cli.command {
        Command::Ergosphere => cmd_ergosphere(&mut ctx),
        Command::Horizon => cmd_horizon(&mut ctx, false),
        Command::Trapped => cmd_trapped(&mut ctx),
        Command::Rays => cmd_rays(&mut ctx),
        Command::KerrVerify { m, a } => cmd_kerr_verify(&mut ctx, m, a),
        Command::Stability => cmd_stability(&mut ctx),
        Command::Wavesim => cmd_wavesim(&mut ctx),
        Command::Pipeline => cmd_horizon(&mut ctx, true),
    };
    match result {
        Ok((ok, fields)) => {
            let s = summary_line(name, if ok { "ok" } else { "failed" }, fields);
            match emit(&s, Some(&out)) {
                EXIT_OK if ok => EXIT_OK,
                EXIT_OK => EXIT_FAILED,
                c => c,
            }
        }
        Err(f) => {
            let mut fields = Map::new();
            fields.insert("stage".into(), json!(f.stage));
            fields.insert("error".into(), json!(f.message()));
            if !ctx.stages.is_empty() {
                fields.insert("stages".into(), Value::Array(ctx.stages.clone()));
            }
            if !cli.quiet {
                eprintln!("artbh: {}: {}", f.stage, f.message());
            }
            let code = if f.error.is_precondition() { EXIT_FAILED } else { EXIT_INTERNAL };
            match emit(&summary_line(name, "failed", fields), Some(&out)) {
                EXIT_OK => code,
                c => c,
            }
        }
    }
}

/// Load, apply flag overrides and resolve the configuration.
fn prepare(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(n) = cli.grid {
        if n == 0 {
            return Err(Error::Config("--grid must be positive".into()));
        }
        let h = 1.0 / n as f64;
        cfg.ergosphere.h = h;
        cfg.stability.grid_h = h;
        cfg.kerr.h = h;
        cfg.wavesim.h = h;
    }
    if let Some(t) = cli.tol {
        cfg.tol = Some(t);
    }
    if let Some(t) = cfg.tol {
        match cli.command {
            Command::Horizon | Command::Pipeline | Command::Stability | Command::Wavesim | Command::Trapped => {
                cfg.horizon.char_tol = t
            }
            Command::Rays => cfg.rays.tol = t,
            Command::Ergosphere | Command::KerrVerify { .. } => {}
        }
    }
    if let Command::KerrVerify { m, a } = cli.command {
        if let (Some(m), Some(a)) = (m, a) {
            cfg.metric = MetricConfig::Kerr {
                m,
                a,
                r_floor: None,
                bbox: None,
            };
        }
    }
    cfg.resolve()
}

/// The plane the planar machinery runs on: the metric itself, or the
/// meridian plane of an axisymmetric one.
fn planar_metric(cfg: &RunConfig) -> Result<SpacetimeMetric> {
    match &cfg.metric {
        MetricConfig::Kerr { m, a, .. } => kerr_meridian(*m, *a, 0.0),
        MetricConfig::KerrCyl { .. } => meridian_reduction(&cfg.metric.build()?),
        other => {
            let m = other.build()?;
            if m.n() != 2 {
                return Err(Error::PreconditionFailed(format!(
                    "{} metric with n = {} has no planar reduction",
                    other.family_name(),
                    m.n()
                )));
            }
            Ok(m)
        }
    }
}

fn stats(curve: &ClosedCurve) -> Value {
    let c = curve.centroid();
    let (mean, lo, hi) = curve.radius_stats(c);
    json!({
        "n_vertices": curve.len(),
        "centroid": c,
        "radius_mean": mean,
        "radius_min": lo,
        "radius_max": hi,
        "length": curve.length(),
    })
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn ergosphere_stage(ctx: &mut Ctx, planar: &SpacetimeMetric) -> Staged<ClosedCurve> {
    match find_ergosphere(planar, ctx.cfg.ergosphere.h) {
        Ok(e) => {
            ctx.stage("ergosphere", "ok", stats(&e));
            Ok(e)
        }
        Err(error) => Err(Failure {
            stage: "ergosphere",
            context: Some("no ergosphere found".into()),
            error,
        }),
    }
}

fn cmd_ergosphere(ctx: &mut Ctx) -> Staged<(bool, Map<String, Value>)> {
    let planar = planar_metric(&ctx.cfg).at("metric")?;
    let ergo = ergosphere_stage(ctx, &planar)?;
    let csv = io::contour_csv(&ergo, |p| ergosphere::delta(&planar, &p).unwrap_or(f64::NAN));
    ctx.write("ergosphere.csv", &csv)?;
    let mut svg = Svg::fit([ergo.vertices.as_slice()], 480.0);
    svg.curve(&ergo, "#1f77b4", 1.5).legend(&[("ergosphere", "#1f77b4")]);
    ctx.write("ergosphere.svg", &svg.render(&format!("ergosphere: {}", planar.name)))?;
    let mut f = obj(stats(&ergo));
    f.insert("metric".into(), json!(planar.name));
    Ok((true, f))
}

/// What the horizon stages found.
struct Found {
    source: HorizonSource,
    kind: Option<HoleKind>,
    curve: ClosedCurve,
    center: P2,
    residual: f64,
    gap: Option<(f64, f64, f64)>,
    report: Option<HorizonReport>,
}

enum HorizonOutcome {
    Found(Found),
    /// expected absence, with the stage that established it
    Absent {
        stage: &'static str,
        reason: String,
        residual_floor: Option<f64>,
    },
}

/// ergosphere → non-characteristic check → trapped region → finder → classify.
/// A characteristic ergosphere (Schwarzschild type) is verified directly.
fn horizon_stages(
    ctx: &mut Ctx,
    planar: &SpacetimeMetric,
    ergo: &ClosedCurve,
) -> Staged<(HorizonOutcome, Option<ClosedCurve>)> {
    let opts = ctx.cfg.horizon;
    let check = ergosphere_noncharacteristic_check(planar, ergo, opts.ergo_char_tol).at("noncharacteristic_check")?;
    if let ErgoCheck::CharacteristicSomewhere { fraction, min_form, .. } = &check {
        if *fraction >= opts.ergo_char_fraction {
            ctx.stage(
                "noncharacteristic_check",
                "schwarzschild_type",
                json!({"fraction": fraction, "min_form": min_form}),
            );
            let res = is_characteristic_curve(planar, ergo).at("characteristic_verification")?;
            if res.max > opts.char_tol {
                return Err(Failure {
                    stage: "characteristic_verification",
                    context: Some("ergosphere is partly characteristic only".into()),
                    error: Error::NotCharacteristic { residual: res.max },
                });
            }
            ctx.stage(
                "characteristic_verification",
                "ok",
                json!({"residual_max": res.max, "residual_mean": res.mean}),
            );
            let kind = classify_horizon(planar, ergo, opts.char_tol, opts.sign_floor).ok().map(|k| k.0);
            ctx.stage("classify", if kind.is_some() { "ok" } else { "indefinite" }, json!({ "kind": kind }));
            return Ok((
                HorizonOutcome::Found(Found {
                    source: HorizonSource::Ergosphere,
                    kind,
                    curve: ergo.clone(),
                    center: ergo.centroid(),
                    residual: res.max,
                    gap: Some((0.0, 0.0, 0.0)),
                    report: None,
                }),
                None,
            ));
        }
    }
    ctx.stage("noncharacteristic_check", "ok", json!({"min_form": check.min_form()}));

    let inner = choose_inner_curve(planar, ergo).at("trapped")?;
    let verdict = trapped_condition_check(planar, &inner).at("trapped")?;
    ctx.stage(
        "trapped",
        "ok",
        json!({"verdict": verdict, "inner": stats(&inner)}),
    );

    match find_limit_cycle(planar, ergo, &inner, &opts) {
        Ok(rep) => {
            ctx.stage(
                "finder",
                "ok",
                json!({
                    "radius_mean": rep.radius_mean,
                    "return_map_slope": rep.return_map_slope,
                    "period": rep.period,
                    "brackets": rep.brackets.len(),
                }),
            );
            ctx.stage(
                "classify",
                "ok",
                json!({"kind": rep.kind, "residual": rep.char_residual, "sign_value": rep.sign_value}),
            );
            let gap = ergosphere_gap(planar, &rep.curve, rep.center).ok();
            Ok((
                HorizonOutcome::Found(Found {
                    source: HorizonSource::LimitCycle,
                    kind: Some(rep.kind),
                    curve: rep.curve.clone(),
                    center: rep.center,
                    residual: rep.char_residual,
                    gap,
                    report: Some(rep),
                }),
                Some(inner),
            ))
        }
        Err(e @ (Error::NoSignChange(_) | Error::NotCharacteristic { .. } | Error::IndefiniteSign { .. })) => {
            let floor = residual_scan(
                planar,
                ergo,
                ergo.centroid(),
                ctx.cfg.stability.offset_range,
                ctx.cfg.stability.n_offsets,
            )
            .ok()
            .map(|r| r.0);
            ctx.stage(
                "finder",
                "no_horizon",
                json!({"reason": e.to_string(), "residual_floor": floor}),
            );
            Ok((
                HorizonOutcome::Absent {
                    stage: "finder",
                    reason: e.to_string(),
                    residual_floor: floor,
                },
                Some(inner),
            ))
        }
        Err(e) => Err(e).at("finder"),
    }
}

fn horizon_fields(outcome: &HorizonOutcome) -> Map<String, Value> {
    let mut f = Map::new();
    match outcome {
        HorizonOutcome::Found(h) => {
            let (mean, lo, hi) = h.curve.radius_stats(h.center);
            f.insert("horizon_found".into(), json!(true));
            f.insert("source".into(), json!(h.source));
            f.insert("kind".into(), json!(h.kind));
            f.insert("radius_mean".into(), json!(mean));
            f.insert("radius_min".into(), json!(lo));
            f.insert("radius_max".into(), json!(hi));
            f.insert("center".into(), json!(h.center));
            f.insert("residual".into(), json!(h.residual));
            f.insert("ergosphere_gap".into(), json!(h.gap.map(|g| g.0)));
        }
        HorizonOutcome::Absent {
            stage,
            reason,
            residual_floor,
        } => {
            f.insert("horizon_found".into(), json!(false));
            f.insert("absent_at".into(), json!(stage));
            f.insert("reason".into(), json!(reason));
            f.insert("residual_floor".into(), json!(residual_floor));
        }
    }
    f
}

fn horizon_svg(title: &str, ergo: &ClosedCurve, inner: Option<&ClosedCurve>, outcome: &HorizonOutcome) -> String {
    let mut svg = Svg::fit([ergo.vertices.as_slice()], 480.0);
    svg.curve(ergo, "#1f77b4", 1.5);
    let mut legend = vec![("ergosphere", "#1f77b4")];
    if let Some(c) = inner {
        svg.curve(c, "#999999", 1.0);
        legend.push(("inner curve", "#999999"));
    }
    if let HorizonOutcome::Found(h) = outcome {
        svg.curve(&h.curve, "#d62728", 2.0).dot(h.center, 2.5, "#000000");
        legend.push(("horizon", "#d62728"));
    }
    svg.legend(&legend);
    svg.render(title)
}

/// `horizon` and `pipeline` (which adds the optional wave stage).
fn cmd_horizon(ctx: &mut Ctx, pipeline: bool) -> Staged<(bool, Map<String, Value>)> {
    let planar = planar_metric(&ctx.cfg).at("metric")?;
    ctx.stage("metric", "ok", json!({"name": planar.name, "n": planar.n()}));
    let ergo = ergosphere_stage(ctx, &planar)?;
    let (outcome, inner) = horizon_stages(ctx, &planar, &ergo)?;
    let prefix = if pipeline { "pipeline" } else { "horizon" };
    if let HorizonOutcome::Found(h) = &outcome {
        let csv = io::contour_csv(&h.curve, |p| {
            let k = h.curve.vertices.iter().position(|v| *v == p).unwrap_or(0);
            normalized_form(&planar, p, h.curve.normals[k]).unwrap_or(f64::NAN)
        });
        ctx.write(&format!("{prefix}_horizon.csv"), &csv)?;
        if let Some(rep) = &h.report {
            ctx.write_json("horizon_report.json", rep)?;
        }
    }
    ctx.write(
        &format!("{prefix}.svg"),
        &horizon_svg(&format!("{prefix}: {}", planar.name), &ergo, inner.as_ref(), &outcome),
    )?;
    let mut fields = horizon_fields(&outcome);
    fields.insert("metric".into(), json!(planar.name));
    if pipeline {
        if let (true, HorizonOutcome::Found(h)) = (ctx.cfg.pipeline.wavesim, &outcome) {
            let w = wave_stage(ctx, &planar, h)?;
            fields.insert("wavesim".into(), Value::Object(w));
        }
        let report = json!({
            "metric": planar.name,
            "stages": ctx.stages,
            "result": fields,
        });
        ctx.write_json("pipeline.json", &report)?;
        fields.insert("stages".into(), json!(ctx.stages.iter().map(|s| s["stage"].clone()).collect::<Vec<_>>()));
    }
    Ok((true, fields))
}

fn cmd_trapped(ctx: &mut Ctx) -> Staged<(bool, Map<String, Value>)> {
    let planar = planar_metric(&ctx.cfg).at("metric")?;
    let ergo = ergosphere_stage(ctx, &planar)?;
    let inner = ergo.scaled(ergo.centroid(), ctx.cfg.trapped.scale);
    let verdict = trapped_condition_check(&planar, &inner).at("trapped")?;
    let chosen = choose_inner_curve(&planar, &ergo).ok();
    let mut svg = Svg::fit([ergo.vertices.as_slice()], 480.0);
    svg.curve(&ergo, "#1f77b4", 1.5).curve(&inner, "#2ca02c", 1.5);
    svg.legend(&[("ergosphere", "#1f77b4"), ("tested curve", "#2ca02c")]);
    ctx.write("trapped.svg", &svg.render(&format!("trapped: {}", planar.name)))?;
    let mut f = Map::new();
    f.insert("metric".into(), json!(planar.name));
    f.insert("scale".into(), json!(ctx.cfg.trapped.scale));
    f.insert("verdict".into(), json!(verdict));
    f.insert(
        "auto_inner_scale".into(),
        json!(chosen.map(|c| c.radius_stats(ergo.centroid()).0 / ergo.radius_stats(ergo.centroid()).0)),
    );
    Ok((true, f))
}

fn ray_seeds(ctx: &Ctx, metric: &SpacetimeMetric) -> Result<Vec<PhaseState>> {
    let rc = &ctx.cfg.rays;
    let n = metric.n();
    let mut out = Vec::new();
    for x in &rc.seeds {
        if x.len() != n {
            return Err(Error::Config(format!("ray seed {x:?} does not have n = {n} coordinates")));
        }
        for k in 0..rc.n_directions {
            let phi = std::f64::consts::TAU * k as f64 / rc.n_directions as f64;
            let mut xi = vec![0.0; n];
            xi[0] = phi.cos();
            if n > 1 {
                xi[1] = phi.sin();
            }
            let xi0 = null_xi0(metric, x, &xi)?;
            out.push(PhaseState::new(0.0, x.clone(), xi0, xi));
        }
    }
    out.extend(random_null_seeds(metric, rc.random, ctx.cfg.seed, rc.random_radii)?);
    if out.is_empty() {
        return Err(Error::Config("no rays: set rays.seeds or rays.random".into()));
    }
    Ok(out)
}

fn cmd_rays(ctx: &mut Ctx) -> Staged<(bool, Map<String, Value>)> {
    let metric = ctx.cfg.metric.build().at("metric")?;
    let seeds = ray_seeds(ctx, &metric).at("seeds")?;
    let rc = ctx.cfg.rays.clone();
    let opts = RayOptions {
        tol: rc.tol,
        h_tol: rc.h_tol,
        require_null: true,
    };
    let runs: Vec<Result<RayPath>> = seeds
        .par_iter()
        .map(|s| integrate_bicharacteristic(&metric, s, rc.s_end, &opts))
        .collect();
    let mut paths = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok(p) => paths.push(p),
            Err(e) => failures.push(json!({"ray": i, "error": e.to_string()})),
        }
    }
    ctx.write("rays.csv", &io::rays_csv(&metric, &paths))?;
    let lines: Vec<Vec<P2>> = paths
        .iter()
        .map(|p| p.states.iter().map(|s| [s.x[0], s.x.get(1).copied().unwrap_or(0.0)]).collect())
        .collect();
    let mut svg = Svg::fit(lines.iter().map(|l| l.as_slice()), 480.0);
    for l in &lines {
        svg.polyline(l, false, "#1f77b4", 0.8);
        if let Some(p) = l.first() {
            svg.dot(*p, 1.5, "#000000");
        }
    }
    ctx.write("rays.svg", &svg.render(&format!("null bicharacteristics: {}", metric.name)))?;
    let h_drift = paths.iter().map(|p| p.h_drift).fold(0.0, f64::max);
    let xi0_drift = paths.iter().map(|p| p.xi0_drift).fold(0.0, f64::max);
    let exits = paths
        .iter()
        .filter(|p| matches!(p.termination, RayTermination::DomainExit { .. }))
        .count();
    let mut f = Map::new();
    f.insert("metric".into(), json!(metric.name));
    f.insert("n_rays".into(), json!(seeds.len()));
    f.insert("max_h_drift".into(), json!(h_drift));
    f.insert("max_xi0_drift".into(), json!(xi0_drift));
    f.insert("domain_exits".into(), json!(exits));
    f.insert("failures".into(), json!(failures));
    if let Some(t_end) = rc.fan_t_end {
        let fan_seeds: Vec<Vec<f64>> = rc.seeds.clone();
        let fans = influence_fan(&metric, &fan_seeds, t_end, rc.n_directions.max(8), &opts).at("fan")?;
        let mut csv = String::from("seed,ray,x1,x2,reached\n");
        for (i, fan) in fans.iter().enumerate() {
            for (k, (p, ok)) in fan.endpoints.iter().zip(&fan.reached).enumerate() {
                csv.push_str(&format!("{i},{k},{:.12e},{:.12e},{}\n", p[0], p[1], ok));
            }
        }
        ctx.write("fan.csv", &csv)?;
        f.insert("fans".into(), json!(fans.len()));
    }
    Ok((failures.is_empty(), f))
}

fn cmd_kerr_verify(ctx: &mut Ctx, m: Option<f64>, a: Option<f64>) -> Staged<(bool, Map<String, Value>)> {
    let (m, a) = match (&ctx.cfg.metric, m, a) {
        (MetricConfig::Kerr { m, a, .. } | MetricConfig::KerrCyl { m, a, .. }, m2, a2) => {
            (m2.unwrap_or(*m), a2.unwrap_or(*a))
        }
        (_, Some(m), Some(a)) => (m, a),
        _ => {
            return Err(Failure {
                stage: "metric",
                context: None,
                error: Error::PreconditionFailed("kerr-verify needs --m and --a or a kerr metric config".into()),
            })
        }
    };
    let kc = ctx.cfg.kerr;
    let rep = kerr_verify(m, a, kc.n_samples, kc.h).at("kerr_verify")?;
    ctx.write_json("kerr_verify.json", &rep)?;
    let mut csv = String::from("curve,idx,rho,z,kerr_r\n");
    for (i, c) in rep.curves.iter().enumerate() {
        for (k, v) in c.vertices.iter().enumerate() {
            let r = ergosphere::kerr_r_cyl(v[0].abs(), v[1], a);
            csv.push_str(&format!("{i},{k},{:.12e},{:.12e},{r:.12e}\n", v[0], v[1]));
        }
    }
    ctx.write("kerr_contours.csv", &csv)?;
    let mut svg = Svg::fit(rep.curves.iter().map(|c| c.vertices.as_slice()), 480.0);
    let colors = ["#d62728", "#1f77b4", "#2ca02c"];
    for (i, c) in rep.curves.iter().enumerate() {
        svg.curve(c, colors[i % colors.len()], 1.5);
    }
    ctx.write("kerr_verify.svg", &svg.render(&format!("Kerr m = {m}, a = {a}: Δ₁ contours")))?;
    let mut f = Map::new();
    f.insert("m".into(), json!(m));
    f.insert("a".into(), json!(a));
    f.insert("r_plus".into(), json!(rep.r_plus));
    f.insert("r_minus".into(), json!(rep.r_minus));
    f.insert("max_scaled_delta1".into(), json!(rep.max_scaled_delta1));
    f.insert("max_contour_error".into(), json!(rep.max_contour_error));
    f.insert("passed".into(), json!(rep.passed));
    Ok((rep.passed, f))
}

fn cmd_stability(ctx: &mut Ctx) -> Staged<(bool, Map<String, Value>)> {
    let sc = ctx.cfg.stability.clone();
    let opts = sc.scan_options(&ctx.cfg.horizon);
    let res: StabilityScanResult = match sc.mode {
        StabilityMode::Persistence => {
            let fam = ctx.cfg.metric.family().at("metric")?.ok_or_else(|| Failure {
                stage: "metric",
                context: None,
                error: Error::PreconditionFailed(
                    "persistence mode needs a perturbation family in [metric]".into(),
                ),
            })?;
            horizon_persistence_scan(&fam, &sc.eps, &opts).at("scan")?
        }
        StabilityMode::Preserved => {
            let (r0, k) = (sc.base_radius, sc.radius_slope);
            preserved_family_demo(&sc.eps, &|e| r0 + k * e, &|_| FourierB::constant(0.0), r0, &opts)
                .at("scan")?
        }
    };
    ctx.write("stability.csv", &io::stability_csv(&res))?;
    ctx.write_json("stability.json", &res)?;
    let curves: Vec<&ClosedCurve> = res
        .outcomes
        .iter()
        .filter_map(|o| match o {
            EpsOutcome::Horizon { curve, .. } => Some(curve),
            _ => None,
        })
        .collect();
    let mut svg = Svg::fit(curves.iter().map(|c| c.vertices.as_slice()), 480.0);
    let colors = ["#d62728", "#ff7f0e", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b"];
    for (i, c) in curves.iter().enumerate() {
        svg.curve(c, colors[i % colors.len()], 1.2);
    }
    ctx.write("stability.svg", &svg.render("horizons across the family"))?;
    let drift = {
        let r: Vec<f64> = res.outcomes.iter().filter_map(|o| o.radius_mean()).collect();
        r.first().map(|r0| r.iter().map(|x| (x - r0).abs()).fold(0.0, f64::max))
    };
    let mut f = Map::new();
    f.insert("verdict".into(), json!(res.verdict));
    f.insert("eps".into(), json!(res.eps));
    f.insert(
        "horizon_found".into(),
        json!(res.outcomes.iter().map(|o| o.is_horizon()).collect::<Vec<_>>()),
    );
    f.insert("radius_drift".into(), json!(drift));
    Ok((true, f))
}

fn cmd_wavesim(ctx: &mut Ctx) -> Staged<(bool, Map<String, Value>)> {
    let planar = planar_metric(&ctx.cfg).at("metric")?;
    let ergo = ergosphere_stage(ctx, &planar)?;
    let (outcome, _) = horizon_stages(ctx, &planar, &ergo)?;
    let h = match outcome {
        HorizonOutcome::Found(h) => h,
        HorizonOutcome::Absent { reason, .. } => {
            return Err(Failure {
                stage: "horizon",
                context: Some("wave experiments need a horizon".into()),
                error: Error::PreconditionFailed(reason),
            })
        }
    };
    let mut f = wave_stage(ctx, &planar, &h)?;
    f.insert("metric".into(), json!(planar.name));
    Ok((true, f))
}

/// Default pulse position: on the x-axis through the centre, clear of the
/// horizon on the side the experiment calls for. Inside, it is centred in the
/// gap between the core sponge and the horizon margin.
fn auto_pulse(h: &Found, side: PulseSide, wc: &WavesimConfig) -> P2 {
    let (_, lo, hi) = h.curve.radius_stats(h.center);
    let reach = gaussian_support(wc.pulse_sigma);
    let r = match side {
        PulseSide::Exterior => hi + reach + 8.0 * wc.h,
        PulseSide::Interior => {
            let sponge = if wc.core_radius > 0.0 { wc.core_radius + wc.sponge_width.max(8.0 * wc.h) } else { 0.0 };
            0.5 * ((sponge + reach) + (lo - reach - 5.0 * wc.h))
        }
    };
    [h.center[0] + r, h.center[1]]
}

fn wave_stage(ctx: &mut Ctx, planar: &SpacetimeMetric, h: &Found) -> Staged<Map<String, Value>> {
    let wc = ctx.cfg.wavesim.clone();
    let mut f = Map::new();
    match wc.experiment {
        Experiment::Containment => {
            let kind = h.kind.ok_or_else(|| Failure {
                stage: "wavesim",
                context: None,
                error: Error::PreconditionFailed("containment needs a classified horizon".into()),
            })?;
            let side = pulse_side_for(kind);
            let pc = wc.pulse_center.unwrap_or_else(|| auto_pulse(h, side, &wc));
            let cfg = wc.wave_config(h.center, pc);
            let r = containment_experiment(planar, &h.curve, side, &cfg).at("wavesim")?;
            ctx.write("energy.csv", &r.report.to_csv())?;
            if wc.snapshot {
                let grid = crate::wavesim::Grid2D::new(&cfg.grid_spec()).at("wavesim")?;
                write_snapshot(&ctx.out, "final_field", &grid, &r.final_u, cfg.t_final).at("output")?;
            }
            ctx.stage(
                "wavesim",
                "ok",
                json!({"leakage_peak": r.leakage_peak, "leakage_final": r.leakage_final}),
            );
            f.insert("experiment".into(), json!("containment"));
            f.insert("pulse_side".into(), json!(format!("{side:?}").to_lowercase()));
            f.insert("pulse_center".into(), json!(pc));
            f.insert("leakage_peak".into(), json!(r.leakage_peak));
            f.insert("leakage_final".into(), json!(r.leakage_final));
            f.insert("initial_energy".into(), json!(r.initial_energy));
            f.insert("steps".into(), json!(r.steps));
            f.insert("dt".into(), json!(r.dt));
        }
        Experiment::Boundedness => {
            let pc = wc
                .pulse_center
                .unwrap_or_else(|| auto_pulse(h, PulseSide::Exterior, &wc));
            let cfg = wc.wave_config(h.center, pc);
            let r = boundedness_probe(planar, &h.curve, &cfg).at("wavesim")?;
            let mut csv = String::from("t,sup_u\n");
            for (t, s) in r.t.iter().zip(&r.sup) {
                csv.push_str(&format!("{t:.9e},{s:.9e}\n"));
            }
            ctx.write("boundedness.csv", &csv)?;
            if wc.snapshot {
                let grid = crate::wavesim::Grid2D::new(&cfg.grid_spec()).at("wavesim")?;
                write_snapshot(&ctx.out, "final_field", &grid, &r.final_u, cfg.t_final).at("output")?;
            }
            ctx.stage("wavesim", "ok", json!({"ratio": r.ratio}));
            f.insert("experiment".into(), json!("boundedness"));
            f.insert("pulse_center".into(), json!(pc));
            f.insert("initial_sup".into(), json!(r.initial_sup));
            f.insert("max_sup".into(), json!(r.max_sup));
            f.insert("ratio".into(), json!(r.ratio));
            f.insert("envelope_nonincreasing".into(), json!(r.envelope_nonincreasing));
        }
    }
    Ok(f)
}
