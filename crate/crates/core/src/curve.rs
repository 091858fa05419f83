//! Closed oriented polylines in the plane.

use serde::{Deserialize, Serialize};

pub type P2 = [f64; 2];

#[inline]
pub fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn unit(a: P2) -> P2 {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

fn seg_dist(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    let t = if l2 > 0.0 {
        (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Counter-clockwise closed polyline with outward unit normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    pub vertices: Vec<P2>,
    pub normals: Vec<P2>,
    /// declared vertex spacing bound
    pub h_curve: f64,
}

pub fn signed_area(pts: &[P2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| cross(pts[i], pts[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

/// Tangents of a periodic, uniformly parametrised sample by fourth-order
/// central differences in the index.
pub fn periodic_tangents(pts: &[P2]) -> Vec<P2> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let p = |k: isize| pts[((i as isize + k).rem_euclid(n as isize)) as usize];
            let (p2, p1, m1, m2) = (p(2), p(1), p(-1), p(-2));
            [
                (-p2[0] + 8.0 * p1[0] - 8.0 * m1[0] + m2[0]) / 12.0,
                (-p2[1] + 8.0 * p1[1] - 8.0 * m1[1] + m2[1]) / 12.0,
            ]
        })
        .collect()
}

/// Uniform arclength resampling of a closed polyline; spacing at most `spacing`.
pub fn resample_closed(pts: &[P2], spacing: f64) -> Vec<P2> {
    let n = pts.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let d = norm(sub(pts[(i + 1) % n], pts[i]));
        cum.push(cum[i] + d);
    }
    let total = cum[n];
    let m = ((total / spacing).ceil() as usize).max(8);
    let ds = total / m as f64;
    let mut out = Vec::with_capacity(m);
    let mut seg = 0;
    for k in 0..m {
        let s = k as f64 * ds;
        while seg + 1 < n && cum[seg + 1] < s {
            seg += 1;
        }
        let (a, b) = (pts[seg], pts[(seg + 1) % n]);
        let l = cum[seg + 1] - cum[seg];
        let t = if l > 0.0 { (s - cum[seg]) / l } else { 0.0 };
        out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    out
}

impl ClosedCurve {
    /// Curve from a uniformly parametrised periodic sample; normals from the
    /// fourth-order tangent estimate.
    pub fn from_periodic_samples(mut pts: Vec<P2>, h_curve: f64) -> Self {
        if signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        let normals = periodic_tangents(&pts)
            .into_iter()
            .map(|t| unit([t[1], -t[0]]))
            .collect();
        ClosedCurve {
            vertices: pts,
            normals,
            h_curve,
        }
    }

    /// Curve with externally supplied normals (any orientation, any length);
    /// they are normalised and flipped to point outward.
    pub fn with_normals(mut pts: Vec<P2>, mut normals: Vec<P2>, h_curve: f64) -> Self {
        assert_eq!(pts.len(), normals.len());
        if signed_area(&pts) < 0.0 {
            pts.reverse();
            normals.reverse();
        }
        let n = pts.len();
        let normals = (0..n)
            .map(|i| {
                let t = sub(pts[(i + 1) % n], pts[(i + n - 1) % n]);
                let out = [t[1], -t[0]];
                let u = unit(normals[i]);
                if dot(u, out) < 0.0 {
                    [-u[0], -u[1]]
                } else {
                    u
                }
            })
            .collect();
        ClosedCurve {
            vertices: pts,
            normals,
            h_curve,
        }
    }

    pub fn circle(center: P2, r: f64, h_curve: f64) -> Self {
        let n = ((2.0 * std::f64::consts::PI * r / h_curve).ceil() as usize).max(16);
        let mut v = Vec::with_capacity(n);
        let mut nm = Vec::with_capacity(n);
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let (s, c) = t.sin_cos();
            v.push([center[0] + r * c, center[1] + r * s]);
            nm.push([c, s]);
        }
        ClosedCurve {
            vertices: v,
            normals: nm,
            h_curve,
        }
    }

    /// Axis-aligned ellipse with semi-axes `(ax, ay)`, exact normals.
    pub fn ellipse(center: P2, ax: f64, ay: f64, h_curve: f64) -> Self {
        let n = ((2.0 * std::f64::consts::PI * ax.max(ay) / h_curve).ceil() as usize).max(16);
        let mut v = Vec::with_capacity(n);
        let mut nm = Vec::with_capacity(n);
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let (s, c) = t.sin_cos();
            v.push([center[0] + ax * c, center[1] + ay * s]);
            nm.push(unit([c / ax, s / ay]));
        }
        ClosedCurve {
            vertices: v,
            normals: nm,
            h_curve,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> P2 {
        let n = self.len();
        let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let c = cross(p, q);
            a += c;
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [cx / (3.0 * a), cy / (3.0 * a)]
    }

    pub fn length(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| norm(sub(self.vertices[(i + 1) % n], self.vertices[i])))
            .sum()
    }

    pub fn max_spacing(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| norm(sub(self.vertices[(i + 1) % n], self.vertices[i])))
            .fold(0.0, f64::max)
    }

    /// Even–odd point-in-polygon test.
    pub fn contains(&self, p: P2) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (v[i], v[j]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Distance from `p` to the polyline.
    pub fn distance_to(&self, p: P2) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| seg_dist(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric Hausdorff distance (vertices against polylines).
    pub fn hausdorff(&self, other: &ClosedCurve) -> f64 {
        let a = self
            .vertices
            .iter()
            .map(|&p| other.distance_to(p))
            .fold(0.0, f64::max);
        let b = other
            .vertices
            .iter()
            .map(|&p| self.distance_to(p))
            .fold(0.0, f64::max);
        a.max(b)
    }

    /// `(mean, min, max)` of vertex distances from `center`.
    pub fn radius_stats(&self, center: P2) -> (f64, f64, f64) {
        let rs: Vec<f64> = self.vertices.iter().map(|&p| norm(sub(p, center))).collect();
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        let min = rs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = rs.iter().cloned().fold(0.0, f64::max);
        (mean, min, max)
    }

    /// Homothety about `center`; normals are unchanged.
    pub fn scaled(&self, center: P2, factor: f64) -> ClosedCurve {
        ClosedCurve {
            vertices: self
                .vertices
                .iter()
                .map(|p| {
                    [
                        center[0] + factor * (p[0] - center[0]),
                        center[1] + factor * (p[1] - center[1]),
                    ]
                })
                .collect(),
            normals: self.normals.clone(),
            h_curve: self.h_curve * factor,
        }
    }

    /// No two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        if n < 4 {
            return n == 3;
        }
        let bb = |i: usize| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            (a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1]))
        };
        let boxes: Vec<_> = (0..n).map(bb).collect();
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (bi, bj) = (boxes[i], boxes[j]);
                if bi.1 < bj.0 || bj.1 < bi.0 || bi.3 < bj.2 || bj.3 < bi.2 {
                    continue;
                }
                if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                    return false;
                }
            }
        }
        true
    }

    /// Every normal has unit length and points away from the enclosed region
    /// (checked against the polyline's own outward direction).
    pub fn normals_outward(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let t = sub(self.vertices[(i + 1) % n], self.vertices[(i + n - 1) % n]);
            let nm = self.normals[i];
            (norm(nm) - 1.0).abs() < 1e-12 && dot(nm, [t[1], -t[0]]) > 0.0
        })
    }
}

fn segments_cross(a: P2, b: P2, c: P2, d: P2) -> bool {
    let o1 = cross(sub(b, a), sub(c, a));
    let o2 = cross(sub(b, a), sub(d, a));
    let o3 = cross(sub(d, c), sub(a, c));
    let o4 = cross(sub(d, c), sub(b, c));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}
