use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field has {found} values, grid has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("inverse transform left imaginary residue {residue:e} (limit {limit:e})")]
    NonHermitianInput { residue: f64, limit: f64 },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("substep {dtau:e} exceeds CFL bound {bound:e}")]
    CflViolation { dtau: f64, bound: f64 },

    #[error("operation undefined for the zero field")]
    ZeroField,

    #[error("quadrature tail estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    ToleranceNotMet { estimate: f64, tolerance: f64 },

    #[error("adaptive quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("blow-up at step {step} (t = {time}): L2 norm {norm:e} exceeds {limit:e}")]
    BlowUpDetected {
        step: usize,
        time: f64,
        norm: f64,
        limit: f64,
    },

    #[error("time step {dt} does not divide final time {t_final}")]
    IncommensurateStep { dt: f64, t_final: f64 },

    #[error("initial data support does not fit the domain: {0}")]
    SupportTooWide(String),

    #[error("least-squares fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("smallest error {smallest:e} is within 3x of the reference gap {gap:e}")]
    SpatialFloorReached { smallest: f64, gap: f64 },
}
