use thiserror::Error;

/// Errors raised by the simulation and reconstruction stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("measurement outcome has vanishing probability {0:e}; collapse undefined")]
    ImpossibleBranch(f64),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("detector efficiency for {0} is zero; counts cannot be rescaled")]
    ZeroEfficiency(String),

    #[error("map annihilates the input state (trace {0:e})")]
    AnnihilatingMap(f64),

    #[error("measurement design is rank deficient (rank {rank} of {required})")]
    RankDeficient { rank: usize, required: usize },

    #[error("no counts to reconstruct from")]
    NoCounts,

    #[error("reference process is not rank one (second eigenvalue {0:e} of trace)")]
    NotRankOne(f64),

    #[error("expected {expected} output states, got {got}")]
    WrongStateCount { expected: usize, got: usize },

    #[error("incomplete design, missing settings: {}", .0.join("; "))]
    MissingSettings(Vec<String>),

    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
