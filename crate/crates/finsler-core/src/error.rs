use thiserror::Error;

/// Errors produced by the geometry kernels.
#[derive(Debug, Error)]
pub enum FinslerError {
    #[error("tangent vector is numerically zero (|y| = {norm:.3e})")]
    DegenerateDirection { norm: f64 },

    #[error("point outside chart: {reason}")]
    ChartViolation { reason: String },

    #[error("pointwise metric data is only defined at the origin")]
    PointwiseOutsideOrigin,

    #[error("metric tensor is not positive definite at the evaluation point")]
    DegenerateMetric,

    #[error("family provides no base-point derivatives; a global family is required")]
    NoBaseDerivatives,

    #[error("integration left the chart at t = {t_exit:.6}")]
    ChartExit { t_exit: f64 },

    #[error("integrator step size underflow at t = {t:.6}")]
    StepFailure { t: f64 },

    #[error("curve is not closed: endpoint gap {gap:.3e}")]
    OpenLoop { gap: f64 },

    #[error("transported vector collapsed toward zero at t = {t:.6}")]
    VectorCollapse { t: f64 },

    #[error("sampled map needs at least {need} points, got {got}")]
    UnderSampled { need: usize, got: usize },

    #[error("function samples use mismatched grids")]
    GridMismatch,

    #[error("unsupported restriction frame: {reason}")]
    UnsupportedFrame { reason: String },

    #[error("invalid metric specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, FinslerError>;
