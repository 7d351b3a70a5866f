use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0} not increasing")]
    NotIncreasing(&'static str),
    #[error("multiplicity mismatch ({0} != {1})")]
    MultiplicityMismatch(usize, usize),
    #[error("time t={0} outside (0,1)")]
    TimeOutOfRange(f64),
    #[error("moment integral diverges: gamma={gamma} on unbounded set")]
    Divergent { gamma: f64 },
    #[error("invalid block shift: {0}")]
    InvalidShift(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("numerical guard: {0}")]
    NumericalGuard(String),
    #[error("singular matrix")]
    Singular,
    #[error("size {n} exceeds ceiling {max} for {backend}")]
    TooLarge { n: usize, max: usize, backend: &'static str },
    #[error("sampler: {0}")]
    Sampler(String),
}

impl Error {
    /// True for failures that reflect a numerical guard rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalGuard(_)
                | Error::Singular
                | Error::TooLarge { .. }
                | Error::NonFinite(_)
                | Error::Sampler(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
