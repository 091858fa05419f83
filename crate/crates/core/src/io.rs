//! Artifact writers: CSV tables, pretty JSON and small native SVG plots.
//!
//! Everything is formatted deterministically (fixed float formats, no
//! timestamps) so identical runs give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::bicharacteristics::{hamiltonian, RayPath};
use crate::curve::{ClosedCurve, P2};
use crate::error::{Error, Result};
use crate::metric::SpacetimeMetric;
use crate::stability::{EpsOutcome, StabilityScanResult};

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

/// `idx,x1,x2,nx1,nx2,field_residual`; `residual` is evaluated per vertex.
pub fn contour_csv(curve: &ClosedCurve, residual: impl Fn(P2) -> f64) -> String {
    let mut s = String::from("idx,x1,x2,nx1,nx2,field_residual\n");
    for (i, (p, n)) in curve.vertices.iter().zip(&curve.normals).enumerate() {
        let _ = writeln!(
            s,
            "{i},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e}",
            p[0],
            p[1],
            n[0],
            n[1],
            residual(*p)
        );
    }
    s
}

/// `ray,s,x0,x1..xn,xi0,xi1..xin,H` for a batch of paths.
pub fn rays_csv(metric: &SpacetimeMetric, paths: &[RayPath]) -> String {
    let n = metric.n();
    let mut s = String::from("ray,s,x0");
    for j in 1..=n {
        let _ = write!(s, ",x{j}");
    }
    s.push_str(",xi0");
    for j in 1..=n {
        let _ = write!(s, ",xi{j}");
    }
    s.push_str(",H\n");
    for (r, path) in paths.iter().enumerate() {
        for st in &path.states {
            let h = hamiltonian(metric, &st.x, &st.full_xi()).unwrap_or(f64::NAN);
            let _ = write!(s, "{r},{:.12e},{:.12e}", st.s, st.x0);
            for v in &st.x {
                let _ = write!(s, ",{v:.12e}");
            }
            let _ = write!(s, ",{:.12e}", st.xi0);
            for v in &st.xi {
                let _ = write!(s, ",{v:.12e}");
            }
            let _ = writeln!(s, ",{h:.6e}");
        }
    }
    s
}

/// `eps,outcome,horizon_radius_mean,ergosphere_gap,residual`.
pub fn stability_csv(res: &StabilityScanResult) -> String {
    let mut s = String::from("eps,outcome,horizon_radius_mean,ergosphere_gap,residual\n");
    let f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
    for (e, o) in res.eps.iter().zip(&res.outcomes) {
        let row = match o {
            EpsOutcome::Horizon {
                radius_mean,
                ergosphere_gap,
                residual,
                ..
            } => format!(
                "horizon,{},{},{}",
                f(Some(*radius_mean)),
                f(Some(*ergosphere_gap)),
                f(Some(*residual))
            ),
            EpsOutcome::NoHorizon { residual_floor, .. } => format!("no_horizon,,,{}", f(*residual_floor)),
        };
        let _ = writeln!(s, "{e},{row}");
    }
    s
}

/// A fixed-viewport SVG canvas in data coordinates.
pub struct Svg {
    lo: P2,
    hi: P2,
    width: f64,
    height: f64,
    margin: f64,
    body: String,
}

impl Svg {
    /// Canvas covering `[lo, hi]` with equal axis scales, `width` pixels wide.
    pub fn new(lo: P2, hi: P2, width: f64) -> Self {
        let (dx, dy) = ((hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300));
        Svg {
            lo,
            hi,
            width,
            height: width * dy / dx,
            margin: 40.0,
            body: String::new(),
        }
    }

    /// Fit a canvas around point sets with a 5% pad.
    pub fn fit<'a>(sets: impl IntoIterator<Item = &'a [P2]>, width: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for set in sets {
            for p in set {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        if !lo[0].is_finite() {
            return Svg::new([-1.0, -1.0], [1.0, 1.0], width);
        }
        let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        Svg::new([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad], width)
    }

    fn map(&self, p: P2) -> (f64, f64) {
        let sx = self.width / (self.hi[0] - self.lo[0]);
        (
            self.margin + (p[0] - self.lo[0]) * sx,
            self.margin + (self.hi[1] - p[1]) * sx,
        )
    }

    pub fn polyline(&mut self, pts: &[P2], closed: bool, color: &str, stroke: f64) -> &mut Self {
        if pts.is_empty() {
            return self;
        }
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = write!(self.body, "<{tag} fill=\"none\" stroke=\"{color}\" stroke-width=\"{stroke}\" points=\"");
        for p in pts {
            let (x, y) = self.map(*p);
            let _ = write!(self.body, "{x:.2},{y:.2} ");
        }
        self.body.push_str("\"/>\n");
        self
    }

    pub fn curve(&mut self, c: &ClosedCurve, color: &str, stroke: f64) -> &mut Self {
        self.polyline(&c.vertices, true, color, stroke)
    }

    pub fn dot(&mut self, p: P2, r: f64, color: &str) -> &mut Self {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r}\" fill=\"{color}\"/>");
        self
    }

    pub fn label(&mut self, p: P2, text: &str, color: &str) -> &mut Self {
        let (x, y) = self.map(p);
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>",
            escape(text)
        );
        self
    }

    /// Legend entries stacked in the top-left corner.
    pub fn legend(&mut self, entries: &[(&str, &str)]) -> &mut Self {
        for (i, (text, color)) in entries.iter().enumerate() {
            let y = self.margin + 14.0 + 16.0 * i as f64;
            let x = self.margin + 6.0;
            let _ = writeln!(
                self.body,
                "<line x1=\"{x}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\
                 <text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
                y - 4.0,
                x + 18.0,
                y - 4.0,
                x + 24.0,
                escape(text)
            );
        }
        self
    }

    fn axes(&self) -> String {
        let mut s = String::new();
        let (x0, y1) = self.map(self.lo);
        let (x1, y0) = self.map(self.hi);
        let _ = writeln!(
            s,
            "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>",
            x1 - x0,
            y1 - y0
        );
        for k in 0..2 {
            let (a, b) = (self.lo[k], self.hi[k]);
            let step = nice_step((b - a) / 5.0);
            let mut t = (a / step).ceil() * step;
            while t <= b + 1e-12 * step {
                let v = if t.abs() < 1e-12 * step { 0.0 } else { t };
                let (px, py) = if k == 0 { self.map([v, self.lo[1]]) } else { self.map([self.lo[0], v]) };
                if k == 0 {
                    let _ = writeln!(
                        s,
                        "<line x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>\
                         <text x=\"{px:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
                        py + 5.0,
                        py + 17.0,
                        tick(v)
                    );
                } else {
                    let _ = writeln!(
                        s,
                        "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{px:.2}\" y2=\"{py:.2}\" stroke=\"#444\"/>\
                         <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>",
                        px - 5.0,
                        px - 7.0,
                        py + 3.0,
                        tick(v)
                    );
                }
                t += step;
            }
        }
        s
    }

    pub fn render(&self, title: &str) -> String {
        let (w, h) = (self.width + 2.0 * self.margin, self.height + 2.0 * self.margin);
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
            w / 2.0,
            escape(title)
        );
        s.push_str(&self.axes());
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn nice_step(raw: f64) -> f64 {
    let p = 10f64.powf(raw.abs().max(1e-300).log10().floor());
    let m = raw / p;
    let m = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    m * p
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
