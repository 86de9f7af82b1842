use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("noise fraction {0} outside [0, 1]")]
    InvalidNoise(f64),

    #[error("invalid outcome permutation {0:?}")]
    InvalidPermutation([usize; 3]),

    #[error("non-finite phase {0}")]
    NonFinitePhase(f64),

    #[error("probability {value:.3e} out of range at {location}")]
    ProbabilityOutOfRange { value: f64, location: String },

    #[error("ill-formed linear program: {0}")]
    MalformedProblem(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
