//! Zero sets of planar scalar fields by marching squares.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::curve::{dot, norm, resample_closed, signed_area, sub, ClosedCurve, P2};
use crate::error::{Error, Result};

/// Something with a zero set in the plane.
pub trait PlanarField: Sync {
    /// Field value, or `None` where it is undefined (excluded regions).
    fn value(&self, p: P2) -> Option<f64>;
}

impl<F: Fn(P2) -> Option<f64> + Sync> PlanarField for F {
    fn value(&self, p: P2) -> Option<f64> {
        self(p)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContourOptions {
    /// refine every edge crossing to `|f| < polish_tol`
    pub polish: bool,
    pub polish_tol: f64,
    /// resample to spacing h/2 and project back onto the zero set
    pub resample: bool,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions {
            polish: true,
            polish_tol: 1e-10,
            resample: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContourSet {
    pub closed: Vec<ClosedCurve>,
    /// chains that end on the box or on undefined cells
    pub open: Vec<Vec<P2>>,
    /// raw edge crossings of each closed loop, before resampling
    pub raw_closed: Vec<Vec<P2>>,
    /// largest |f| over raw crossings
    pub max_raw_residual: f64,
}

impl ContourSet {
    /// Closed curve enclosing the largest area.
    pub fn outermost(&self) -> Option<&ClosedCurve> {
        self.closed
            .iter()
            .max_by(|a, b| a.signed_area().total_cmp(&b.signed_area()))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

pub fn extract_contour<F: PlanarField + ?Sized>(
    field: &F,
    lo: P2,
    hi: P2,
    h: f64,
) -> Result<ContourSet> {
    extract_contour_with(field, lo, hi, h, &ContourOptions::default())
}

pub fn extract_contour_with<F: PlanarField + ?Sized>(
    field: &F,
    lo: P2,
    hi: P2,
    h: f64,
    opts: &ContourOptions,
) -> Result<ContourSet> {
    if !(h > 0.0) || !(hi[0] > lo[0] && hi[1] > lo[1]) {
        return Err(Error::InvalidParameter(format!(
            "bad contour grid: h = {h}, box {lo:?}..{hi:?}"
        )));
    }
    let nx = ((hi[0] - lo[0]) / h).round() as usize;
    let ny = ((hi[1] - lo[1]) / h).round() as usize;
    let hx = (hi[0] - lo[0]) / nx as f64;
    let hy = (hi[1] - lo[1]) / ny as f64;
    let node = |i: usize, j: usize| -> P2 { [lo[0] + i as f64 * hx, lo[1] + j as f64 * hy] };

    let vals: Vec<f64> = (0..=ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..=nx).map(move |i| field.value(node(i, j)).filter(|v| v.is_finite()).unwrap_or(f64::NAN))
        })
        .collect();
    let val = |i: usize, j: usize| vals[j * (nx + 1) + i];

    let (mut any_pos, mut any_neg) = (false, false);
    for v in vals.iter().filter(|v| !v.is_nan()) {
        if *v >= 0.0 {
            any_pos = true;
        } else {
            any_neg = true;
        }
    }
    if !(any_pos && any_neg) {
        return Err(Error::NoZeroSet);
    }

    // crossing points, one per edge
    let mut crossing: HashMap<Edge, P2> = HashMap::new();
    let mut max_raw: f64 = 0.0;
    let mut edge_point = |e: Edge, crossing: &mut HashMap<Edge, P2>| -> P2 {
        if let Some(p) = crossing.get(&e) {
            return *p;
        }
        let (a, b, fa, fb) = match e {
            Edge::H(i, j) => (node(i, j), node(i + 1, j), val(i, j), val(i + 1, j)),
            Edge::V(i, j) => (node(i, j), node(i, j + 1), val(i, j), val(i, j + 1)),
        };
        let t = fa / (fa - fb);
        let mut p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        if opts.polish {
            p = polish_edge(field, a, b, fa, fb, opts.polish_tol).unwrap_or(p);
        }
        if let Some(v) = field.value(p) {
            max_raw = max_raw.max(v.abs());
        }
        crossing.insert(e, p);
        p
    };

    let pos = |v: f64| v >= 0.0;
    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1));
            if v00.is_nan() || v10.is_nan() || v11.is_nan() || v01.is_nan() {
                continue;
            }
            let idx = (pos(v00) as u8) | (pos(v10) as u8) << 1 | (pos(v11) as u8) << 2 | (pos(v01) as u8) << 3;
            let (b, r, t, l) = (Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j));
            match idx {
                0 | 15 => {}
                1 | 14 => segments.push((l, b)),
                2 | 13 => segments.push((b, r)),
                3 | 12 => segments.push((l, r)),
                4 | 11 => segments.push((r, t)),
                6 | 9 => segments.push((b, t)),
                7 | 8 => segments.push((t, l)),
                5 | 10 => {
                    let c = field
                        .value([node(i, j)[0] + 0.5 * hx, node(i, j)[1] + 0.5 * hy])
                        .unwrap_or(f64::NAN);
                    let scale = v00.abs().max(v10.abs()).max(v11.abs()).max(v01.abs());
                    if !(c.abs() > 1e-14 * scale) {
                        return Err(Error::AmbiguousTopology { i, j });
                    }
                    // centre joins the two corners sharing its sign
                    let centre_like_00 = pos(c) == pos(v00);
                    if centre_like_00 {
                        segments.push((b, r));
                        segments.push((t, l));
                    } else {
                        segments.push((l, b));
                        segments.push((r, t));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // chain segments through shared edges
    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        incident.entry(*a).or_default().push(k);
        incident.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains: Vec<(Vec<Edge>, bool)> = Vec::new();
    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| -> (Vec<Edge>, bool) {
        let mut edges = vec![start_edge];
        let mut seg = start_seg;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            if next == start_edge {
                return (edges, true);
            }
            edges.push(next);
            at = next;
            match incident[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (edges, false),
            }
        }
    };
    // open chains first, from their free ends (sorted for determinism)
    let mut ends: Vec<Edge> = incident
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(e, _)| *e)
        .collect();
    ends.sort_by_key(edge_key);
    for e in ends {
        let s = incident[&e][0];
        if !used[s] {
            chains.push(walk(s, e, &mut used));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            chains.push(walk(k, segments[k].0, &mut used));
        }
    }

    let mut closed = Vec::new();
    let mut raw_closed = Vec::new();
    let mut open = Vec::new();
    for (edges, is_loop) in chains {
        let pts: Vec<P2> = edges.iter().map(|e| edge_point(*e, &mut crossing)).collect();
        if is_loop && pts.len() >= 4 {
            raw_closed.push(pts);
        } else {
            open.push(pts);
        }
    }
    for pts in &raw_closed {
        let mut pts = pts.clone();
        if signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        closed.push(finish_curve(field, &pts, h, opts));
    }
    Ok(ContourSet {
        closed,
        open,
        raw_closed,
        max_raw_residual: max_raw,
    })
}

fn edge_key(e: &Edge) -> (u8, usize, usize) {
    match *e {
        Edge::H(i, j) => (0, j, i),
        Edge::V(i, j) => (1, j, i),
    }
}

/// Illinois refinement of a sign change on the segment `a..b`.
fn polish_edge<F: PlanarField + ?Sized>(field: &F, a: P2, b: P2, fa: f64, fb: f64, tol: f64) -> Option<P2> {
    let at = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let (mut t0, mut t1, mut f0, mut f1) = (0.0, 1.0, fa, fb);
    if f0 == 0.0 {
        return Some(a);
    }
    if f1 == 0.0 {
        return Some(b);
    }
    let mut side = 0;
    for _ in 0..200 {
        let t = (t0 * f1 - t1 * f0) / (f1 - f0);
        let f = field.value(at(t))?;
        if f.abs() < tol || (t1 - t0).abs() < 1e-15 {
            return Some(at(t));
        }
        if (f < 0.0) == (f0 < 0.0) {
            t0 = t;
            f0 = f;
            if side == -1 {
                f1 *= 0.5;
            }
            side = -1;
        } else {
            t1 = t;
            f1 = f;
            if side == 1 {
                f0 *= 0.5;
            }
            side = 1;
        }
    }
    Some(at(0.5 * (t0 + t1)))
}

fn gradient<F: PlanarField + ?Sized>(field: &F, p: P2, d: f64) -> Option<P2> {
    let fx = (field.value([p[0] + d, p[1]])? - field.value([p[0] - d, p[1]])?) / (2.0 * d);
    let fy = (field.value([p[0], p[1] + d])? - field.value([p[0], p[1] - d])?) / (2.0 * d);
    Some([fx, fy])
}

/// Newton projection onto the zero set along the gradient.
pub fn project_to_zero<F: PlanarField + ?Sized>(field: &F, p: P2, scale: f64) -> P2 {
    let d = 5e-6 * (1.0 + norm(p));
    let mut q = p;
    for _ in 0..30 {
        let (Some(f), Some(g)) = (field.value(q), gradient(field, q, d)) else {
            return q;
        };
        if f.abs() < 1e-13 {
            break;
        }
        let g2 = dot(g, g);
        if g2 == 0.0 {
            break;
        }
        let step = [f * g[0] / g2, f * g[1] / g2];
        if norm(step) > 0.5 * scale {
            break;
        }
        q = [q[0] - step[0], q[1] - step[1]];
        if norm(step) < 1e-15 * (1.0 + norm(q)) {
            break;
        }
    }
    q
}

fn finish_curve<F: PlanarField + ?Sized>(field: &F, pts: &[P2], h: f64, opts: &ContourOptions) -> ClosedCurve {
    let h_curve = 0.5 * h;
    if !opts.resample {
        return ClosedCurve::from_periodic_samples(pts.to_vec(), h);
    }
    let samples = resample_closed(pts, 0.95 * h_curve);
    let projected: Vec<P2> = samples
        .par_iter()
        .map(|&p| project_to_zero(field, p, h))
        .collect();
    let normals: Vec<P2> = projected
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let n = projected.len();
            gradient(field, p, 5e-6 * (1.0 + norm(p)))
                .filter(|g| norm(*g) > 0.0)
                .unwrap_or_else(|| {
                    let t = sub(projected[(i + 1) % n], projected[(i + n - 1) % n]);
                    [t[1], -t[0]]
                })
        })
        .collect();
    ClosedCurve::with_normals(projected, normals, h_curve)
}
