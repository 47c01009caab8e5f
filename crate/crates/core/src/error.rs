use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("empty constraint: no bi-infinite sequence avoids the forbidden words")]
    EmptyConstraint,

    #[error("constraint graph is not irreducible")]
    Reducible,

    #[error("invalid Markov chain: {0}")]
    InvalidChain(String),

    #[error("invalid erasure process: {0}")]
    InvalidErasure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{what} = {got} exceeds the cap of {cap}")]
    ResourceCap {
        what: &'static str,
        cap: usize,
        got: usize,
    },

    #[error("{0} did not converge within {1} iterations")]
    NoConvergence(&'static str, usize),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Json(_)
            | Error::InvalidConstraint(_)
            | Error::InvalidChain(_)
            | Error::InvalidErasure(_) => 2,
            Error::EmptyConstraint
            | Error::Reducible
            | Error::Precondition(_)
            | Error::Unsupported(_) => 3,
            Error::ResourceCap { .. } => 4,
            Error::NoConvergence(..) | Error::Io(_) | Error::Csv(_) => 1,
        }
    }

    pub(crate) fn cap(what: &'static str, cap: usize, got: usize) -> Self {
        Error::ResourceCap { what, cap, got }
    }
}
