use std::fmt;
use std::sync::Arc;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Moving fluid: velocity `v`, density `ρ`, sound speed `c`.
#[derive(Clone)]
pub struct FlowField {
    pub dim: usize,
    pub v: VectorFn,
    pub rho: ScalarFn,
    pub c: ScalarFn,
}

impl fmt::Debug for FlowField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlowField(dim = {})", self.dim)
    }
}

impl FlowField {
    /// Unit density and sound speed.
    pub fn unit<V>(dim: usize, v: V) -> Self
    where
        V: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        FlowField {
            dim,
            v: Arc::new(v),
            rho: Arc::new(|_| 1.0),
            c: Arc::new(|_| 1.0),
        }
    }

    pub fn uniform(velocity: Vec<f64>, rho: f64, c: f64) -> Self {
        let dim = velocity.len();
        FlowField {
            dim,
            v: Arc::new(move |_| velocity.clone()),
            rho: Arc::new(move |_| rho),
            c: Arc::new(move |_| c),
        }
    }

    /// `base + eps·delta` in the velocity; density and sound speed from `base`.
    pub fn sum(base: FlowField, delta: FlowField, eps: f64) -> Self {
        let (bv, dv) = (base.v.clone(), delta.v.clone());
        FlowField {
            dim: base.dim,
            v: Arc::new(move |x| {
                let mut v = bv(x);
                for (vi, di) in v.iter_mut().zip(dv(x)) {
                    *vi += eps * di;
                }
                v
            }),
            rho: base.rho,
            c: base.c,
        }
    }
}

/// Moving dielectric for the Gordon metric.
#[derive(Clone)]
pub struct GordonMedium {
    pub dim: usize,
    pub n_refr: ScalarFn,
    pub w: VectorFn,
    pub c: f64,
}

impl fmt::Debug for GordonMedium {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GordonMedium(dim = {}, c = {})", self.dim, self.c)
    }
}

impl GordonMedium {
    pub fn uniform(n_refr: f64, w: Vec<f64>, c: f64) -> Self {
        let dim = w.len();
        GordonMedium {
            dim,
            n_refr: Arc::new(move |_| n_refr),
            w: Arc::new(move |_| w.clone()),
            c,
        }
    }
}
