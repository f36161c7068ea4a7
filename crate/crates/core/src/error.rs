use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("{which} undetermined: condition not satisfied up to scan_max = {scan_max}")]
    RadiusUndetermined { which: &'static str, scan_max: f64 },

    #[error("tail of kappa is not declared negative; cannot certify {0} beyond the scan range")]
    TailNotCertified(&'static str),

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("sublevel set is empty: 2L/lambda = {0} < 2")]
    EmptySublevelSet(f64),

    #[error("diffusion matrix is singular at {0:?}")]
    SingularDiffusion(Vec<f64>),

    #[error("explosion guard: non-finite state for particle {particle} at step {step}")]
    Explosion { particle: usize, step: u64 },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown built-in model '{0}'")]
    UnknownModel(String),

    #[error("insufficient points for a fit: need {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("missing declaration: {0}")]
    MissingDeclaration(&'static str),

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
