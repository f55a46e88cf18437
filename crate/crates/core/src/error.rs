use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("rank-one extraction is not tight (eigenvalue ratio {ratio:.3e})")]
    TightnessViolation { ratio: f64 },

    #[error("target steering vector is identically zero")]
    DegenerateSteering,

    #[error("linearization anchor coincides with the other antenna")]
    DegenerateAnchor,

    #[error("region too small: {0}")]
    RegionTooSmall(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 1,
            Error::InvalidConfig(_) | Error::Parse(_) | Error::RegionTooSmall(_) => 2,
            _ => 3,
        }
    }
}
