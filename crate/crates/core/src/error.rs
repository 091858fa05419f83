use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library. Variants are grouped by the stage that
/// raises them; the CLI maps them onto exit codes through [`Error::is_precondition`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // metric evaluation
    #[error("metric is degenerate at {x:?}: |det g^jk| = {det:e}")]
    DegenerateMetric { x: Vec<f64>, det: f64 },
    #[error("point {x:?} is outside the metric domain ({reason})")]
    OutOfDomain { x: Vec<f64>, reason: String },
    #[error("flow speed {speed} is not below the light speed {c}")]
    SuperluminalFlow { speed: f64, c: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // zero sets and curves
    #[error("no zero set: the field has no sign change on the grid")]
    NoZeroSet,
    #[error("ambiguous saddle in cell ({i}, {j}); refine the grid")]
    AmbiguousTopology { i: usize, j: usize },
    #[error("not found: {0}")]
    NotFound(String),

    // ray integration
    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepUnderflow { s: f64, h: f64 },
    #[error("hamiltonian drift {drift:e} exceeded the limit at s = {s}")]
    DriftExceeded { s: f64, drift: f64 },
    #[error("point {x:?} is not inside the ergosphere (delta = {delta:e})")]
    NotInsideErgosphere { x: Vec<f64>, delta: f64 },
    #[error("point {x:?} is outside the ergosphere (delta = {delta:e})")]
    OutsideErgosphere { x: Vec<f64>, delta: f64 },
    #[error("characteristic direction field flipped branch at sigma = {sigma}")]
    BranchFlip { sigma: f64 },

    // horizon finding
    #[error("ergosphere is characteristic on {fraction:.3} of its length (min |form| = {min_form:e})")]
    ErgosphereCharacteristic { fraction: f64, min_form: f64 },
    #[error("no limit cycle: {0}")]
    NoSignChange(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("curve is not characteristic (residual {residual:e})")]
    NotCharacteristic { residual: f64 },
    #[error("sign of g^j0 nu_j is not uniform on the curve (min |s| = {min_abs:e}, {positive} positive, {negative} negative)")]
    IndefiniteSign {
        min_abs: f64,
        positive: usize,
        negative: usize,
    },
    #[error("family member eps = {eps} is not characteristic on its ergosphere (residual {residual:e})")]
    ConstructionFailed { eps: f64, residual: f64 },

    // wave simulation
    #[error("time step {dt:e} exceeds the CFL bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("g^00 is not positive at {x:?}")]
    NonPositiveG00 { x: Vec<f64> },
    #[error("numerical blow-up at t = {t}: max |u| = {max:e}")]
    NumericalBlowup { t: f64, max: f64 },

    // plumbing
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that describe the input geometry rather than a defect of
    /// the tool (CLI exit code 2).
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::NumericalBlowup { .. } | Error::StepUnderflow { .. })
    }

    pub fn out_of_domain(x: &[f64], reason: impl Into<String>) -> Self {
        Error::OutOfDomain {
            x: x.to_vec(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
