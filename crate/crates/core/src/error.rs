use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        what: String,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("invalid properness order {0}; expected 1 or 2")]
    InvalidOrder(usize),

    #[error("system is not T{order}-proper: {}", reasons.join("; "))]
    NotProper { order: usize, reasons: Vec<String> },

    #[error("{what} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { what: String, min_eigenvalue: f64 },

    #[error("probability {value} for {what} is outside [0, 1]")]
    Probability { what: String, value: f64 },

    #[error(
        "innovation covariance at t={t} is singular beyond tolerance \
         (rank {rank}/{dim}, condition estimate {condition:e})"
    )]
    SingularInnovation {
        t: usize,
        rank: usize,
        dim: usize,
        condition: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dimension(what: &str, expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            what: what.to_string(),
            expected,
            got,
        }
    }
}
