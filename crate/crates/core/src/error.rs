use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("no admissible root: min w = {min_w:.3e} at quadrature nodes")]
    NoAdmissibleRoot { min_w: f64 },

    #[error("linear solve broke down: {0}")]
    LinearSolve(String),

    #[error("time step {dt:.3e} fell below dt_min = {dt_min:.3e}")]
    DtUnderflow { dt: f64, dt_min: f64 },

    #[error("elliptic solve failed: {0}")]
    EllipticFailure(Box<Error>),

    #[error("negative density (min n = {min:.3e})")]
    NegativeDensity { min: f64 },

    #[error("density {min:.3e} at or below floor {floor:.1e}; entropy identity undefined")]
    DegenerateDensity { min: f64, floor: f64 },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("step {step} at t = {t:.6e}: {source}")]
    Solver {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn elliptic(self) -> Self {
        match self {
            Error::EllipticFailure(_) => self,
            other => Error::EllipticFailure(Box::new(other)),
        }
    }
}
