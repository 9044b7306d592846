use thiserror::Error;

/// Errors raised across the library. Each variant maps onto a stable
/// machine-readable kind (see [`Error::kind`]) used by the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what}: precision exhausted at {bits} bits, retry with at least {suggested_bits} bits")]
    Precision {
        what: String,
        bits: u32,
        suggested_bits: u32,
    },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("singular recursion: {0}")]
    Singularity(String),

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("insufficient acceptance: {accepted} of {reps} replicas accepted")]
    InsufficientAcceptance { accepted: u64, reps: u64 },
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Precision { .. } => "precision",
            Error::Convergence(_) => "convergence",
            Error::Capacity(_) => "capacity",
            Error::Singularity(_) => "singularity",
            Error::Range(_) => "range",
            Error::Domain(_) => "domain",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::InsufficientAcceptance { .. } => "insufficient_acceptance",
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Range(_) | Error::Domain(_) | Error::DegenerateFit(_) => 2,
            Error::Precision { .. }
            | Error::Convergence(_)
            | Error::Singularity(_)
            | Error::InsufficientAcceptance { .. } => 3,
            Error::Capacity(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
