use serde::{Deserialize, Serialize};

use crate::curve::{ClosedCurve, P2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: P2,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: P2,
    pub hi: P2,
    pub h: f64,
    /// widened to 8 cells if smaller
    pub sponge_width: f64,
    pub masks: Vec<Disc>,
}

/// Uniform node grid with an activity mask, sponge damping and per-row
/// spans of active nodes.
#[derive(Debug, Clone)]
pub struct Grid2D {
    pub lo: P2,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub active: Vec<bool>,
    /// sponge damping rate per node (0 in the physical region)
    pub sigma: Vec<f64>,
    /// half-open `[i0, i1)` ranges of active nodes on each row
    pub spans: Vec<Vec<(usize, usize)>>,
    pub sponge_width: f64,
    /// linear 0→1 ramp across each sponge (drives the grid-mode filter)
    pub sponge_weight: Vec<f64>,
}

impl Grid2D {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        let h = spec.h;
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing h = {h}")));
        }
        let nx = ((spec.hi[0] - spec.lo[0]) / h).round() as usize;
        let ny = ((spec.hi[1] - spec.lo[1]) / h).round() as usize;
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidParameter("grid needs at least 4 cells per side".into()));
        }
        if ((spec.hi[0] - spec.lo[0]) - nx as f64 * h).abs() > 1e-9 * h * nx as f64
            || ((spec.hi[1] - spec.lo[1]) - ny as f64 * h).abs() > 1e-9 * h * ny as f64
        {
            return Err(Error::InvalidParameter("box is not a whole number of cells".into()));
        }
        let width = spec.sponge_width.max(8.0 * h);
        let (nx1, ny1) = (nx + 1, ny + 1);
        let mut active = vec![false; nx1 * ny1];
        let mut sigma = vec![0.0; nx1 * ny1];
        let ramp = |d: f64| {
            if d >= width {
                0.0
            } else {
                let x = 1.0 - d / width;
                x * x * x
            }
        };
        let sig_max = 40.0 / width;
        let mut ramp_w = vec![0.0; nx1 * ny1];
        for j in 1..ny {
            for i in 1..nx {
                let p = [spec.lo[0] + i as f64 * h, spec.lo[1] + j as f64 * h];
                let mut masked = false;
                let mut d_min = (p[0] - spec.lo[0])
                    .min(spec.hi[0] - p[0])
                    .min(p[1] - spec.lo[1])
                    .min(spec.hi[1] - p[1]);
                for m in &spec.masks {
                    let d = ((p[0] - m.center[0]).powi(2) + (p[1] - m.center[1]).powi(2)).sqrt() - m.radius;
                    if d <= 0.0 {
                        masked = true;
                    }
                    d_min = d_min.min(d);
                }
                // two Dirichlet rows next to masks and edges (wide stencils)
                if masked || d_min < 2.0 * h - 1e-12 * h {
                    continue;
                }
                let k = j * nx1 + i;
                active[k] = true;
                sigma[k] = sig_max * ramp(d_min);
                ramp_w[k] = ramp(d_min).cbrt();
            }
        }
        let spans = (0..ny1)
            .map(|j| {
                let mut v = Vec::new();
                let mut i = 0;
                while i < nx1 {
                    if active[j * nx1 + i] {
                        let s = i;
                        while i < nx1 && active[j * nx1 + i] {
                            i += 1;
                        }
                        v.push((s, i));
                    } else {
                        i += 1;
                    }
                }
                v
            })
            .collect();
        Ok(Grid2D {
            lo: spec.lo,
            nx,
            ny,
            h,
            active,
            sigma,
            spans,
            sponge_width: width,
            sponge_weight: ramp_w,
        })
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn node(&self, k: usize) -> P2 {
        let nx1 = self.nx + 1;
        [
            self.lo[0] + (k % nx1) as f64 * self.h,
            self.lo[1] + (k / nx1) as f64 * self.h,
        ]
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }
}

pub const CELL_EXCLUDED: u8 = 0;
pub const CELL_INTERIOR: u8 = 1;
pub const CELL_EXTERIOR: u8 = 2;
pub const CELL_SPONGE: u8 = 3;

/// Cell classes (by cell centre against the horizon) and exterior nodes.
#[derive(Debug, Clone)]
pub struct RegionMasks {
    pub cells: Vec<u8>,
    pub node_exterior: Vec<bool>,
}

/// Even–odd fill of `curve` sampled at `lo + (i + off, j + off)·h`.
fn scanline_inside(curve: &ClosedCurve, lo: P2, h: f64, n_i: usize, n_j: usize, off: f64) -> Vec<bool> {
    let v = &curve.vertices;
    let n = v.len();
    let mut out = vec![false; n_i * n_j];
    let mut xs: Vec<f64> = Vec::new();
    for j in 0..n_j {
        let y = lo[1] + (j as f64 + off) * h;
        xs.clear();
        for e in 0..n {
            let (a, b) = (v[e], v[(e + 1) % n]);
            if (a[1] > y) != (b[1] > y) {
                xs.push(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
            }
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        for pair in xs.chunks(2) {
            if pair.len() < 2 {
                break;
            }
            let i0 = ((pair[0] - lo[0]) / h - off).ceil().max(0.0) as usize;
            let i1 = ((pair[1] - lo[0]) / h - off).floor();
            if i1 < 0.0 {
                continue;
            }
            let i1 = (i1 as usize).min(n_i - 1);
            for i in i0..=i1 {
                out[j * n_i + i] = true;
            }
        }
    }
    out
}

impl RegionMasks {
    pub fn new(grid: &Grid2D, horizon: &ClosedCurve) -> Self {
        let nx1 = grid.nx + 1;
        let inside_cell = scanline_inside(horizon, grid.lo, grid.h, grid.nx, grid.ny, 0.5);
        let mut cells = vec![CELL_EXCLUDED; grid.nx * grid.ny];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let k = j * nx1 + i;
                let corners = [k, k + 1, k + nx1, k + nx1 + 1];
                if !corners.iter().all(|c| grid.active[*c]) {
                    continue;
                }
                let c = j * grid.nx + i;
                cells[c] = if corners.iter().any(|c| grid.sigma[*c] > 0.0) {
                    CELL_SPONGE
                } else if inside_cell[c] {
                    CELL_INTERIOR
                } else {
                    CELL_EXTERIOR
                };
            }
        }
        let inside_node = scanline_inside(horizon, grid.lo, grid.h, nx1, grid.ny + 1, 0.0);
        let node_exterior = (0..grid.n_nodes())
            .map(|k| grid.active[k] && grid.sigma[k] == 0.0 && !inside_node[k])
            .collect();
        RegionMasks { cells, node_exterior }
    }

    pub fn sup_exterior(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.node_exterior)
            .filter(|(_, e)| **e)
            .fold(0.0f64, |a, (v, _)| a.max(v.abs()))
    }
}
