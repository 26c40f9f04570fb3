use thiserror::Error;

/// Errors raised by grid construction, model evaluation and time stepping.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("singular parameters: beta = nu^2 makes q undefined (beta = {beta}, nu = {nu})")]
    SingularParams { beta: f64, nu: f64 },

    #[error("invalid soliton parameters: {0}")]
    InvalidSoliton(String),

    #[error("unsupported tableau: {0}")]
    UnsupportedTableau(String),

    #[error("singular per-mode stage matrix at mode {mode} (tau = {tau})")]
    SingularMode { mode: usize, tau: f64 },

    #[error("invalid solver setting: {0}")]
    InvalidSolver(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("imaginary residue {residue:e} exceeds tolerance in {context}")]
    ImaginaryResidue { residue: f64, context: &'static str },

    #[error("stage iteration did not converge at t = {t}: residual {residual:e} after {iterations} iterations")]
    NotConverged {
        t: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("final time {t_final} is not an integer multiple of tau = {tau}")]
    IncommensurateTime { t_final: f64, tau: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidGrid(_) => "invalid-grid",
            Self::LengthMismatch { .. } => "length-mismatch",
            Self::SingularParams { .. } => "singular-params",
            Self::InvalidSoliton(_) => "invalid-soliton",
            Self::UnsupportedTableau(_) => "unsupported-tableau",
            Self::SingularMode { .. } => "singular-mode",
            Self::InvalidSolver(_) => "invalid-solver",
            Self::NonFinite(_) => "non-finite",
            Self::ImaginaryResidue { .. } => "imaginary-residue",
            Self::NotConverged { .. } => "not-converged",
            Self::IncommensurateTime { .. } => "incommensurate-time",
            Self::Oracle(_) => "oracle",
            Self::Config(_) => "config",
            Self::Io(_) => "io",
        }
    }
}
