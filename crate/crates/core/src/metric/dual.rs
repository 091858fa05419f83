//! Exact coefficient gradients by forward-mode dual numbers.

use nalgebra::DMatrix;
use num_dual::{Dual64, DualNum};

use crate::error::Result;

/// A metric whose entries are written once, generically over the scalar type.
pub(crate) trait DualMetric {
    fn dim(&self) -> usize;

    /// Row-major `(n+1)^2` entries of `g^{jk}` at `x`.
    fn entries<D: DualNum<f64> + Copy>(&self, x: &[D]) -> Result<Vec<D>>;
}

pub(crate) fn real<M: DualMetric>(m: &M, x: &[f64]) -> Result<DMatrix<f64>> {
    let k = m.dim() + 1;
    let e = m.entries(x)?;
    Ok(DMatrix::from_row_slice(k, k, &e))
}

pub(crate) fn grad<M: DualMetric>(m: &M, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    let n = m.dim();
    let k = n + 1;
    let mut out = Vec::with_capacity(n);
    for p in 0..n {
        let xd: Vec<Dual64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual64::new(v, if i == p { 1.0 } else { 0.0 }))
            .collect();
        let e = m.entries(&xd)?;
        let d: Vec<f64> = e.iter().map(|v| v.eps).collect();
        out.push(DMatrix::from_row_slice(k, k, &d));
    }
    Ok(out)
}

/// `η + V Vᵀ`-style assembly helper: symmetric matrix from base diagonal and
/// a list of rank-one vectors (each with a sign).
pub(crate) fn rank_one<D: DualNum<f64> + Copy>(diag: &[f64], vecs: &[&[D]]) -> Vec<D> {
    let k = diag.len();
    let mut e = vec![D::from(0.0); k * k];
    for i in 0..k {
        e[i * k + i] = D::from(diag[i]);
    }
    for v in vecs {
        for i in 0..k {
            for j in 0..k {
                e[i * k + j] += v[i] * v[j];
            }
        }
    }
    e
}
