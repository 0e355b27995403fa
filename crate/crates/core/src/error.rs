use thiserror::Error;

/// Errors raised by grid construction, assembly, solves and run plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size n = {0} is below the minimum of 8")]
    GridTooSmall(usize),

    #[error("unknown grid scheme `{0}`")]
    UnknownScheme(String),

    #[error("differentiation order {0} is not supported (use 1 or 2)")]
    UnsupportedOrder(usize),

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("angular mode must be non-negative, got {0}")]
    NegativeMode(i64),

    #[error("field does not vanish at r = 1 (u(1) = {0:e})")]
    BoundaryValue(f64),

    #[error("fields live on different grids or modes")]
    GridMismatch,

    #[error("sigma = {sigma} is at or below the threshold sigma* = {sigma_star:.6} for mode {mode}; the H_sigma form is not positive definite")]
    Indefinite { sigma: f64, sigma_star: f64, mode: usize },

    #[error("sigma = {sigma} lies within {guard:e} of sigma* = {sigma_star:.6}; the norm degenerates there")]
    DegenerateSigma { sigma: f64, sigma_star: f64, guard: f64 },

    #[error("linear system condition estimate {0:e} exceeds the 1e13 guard")]
    IllConditioned(f64),

    #[error("linear system is numerically singular")]
    Singular,

    #[error("the zero field has no Nehari projection or Rayleigh quotient")]
    ZeroField,

    #[error("H_sigma form value {0:e} is not positive; the ray does not meet the Nehari manifold")]
    NonPositiveForm(f64),

    #[error("nonlinear integral {0:e} is not positive")]
    NonPositiveNonlinear(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the Pohozaev identity needs a constant weight g")]
    NonConstantWeight,

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("config error at key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::GridTooSmall(_)
                | Error::UnknownScheme(_)
                | Error::UnsupportedOrder(_)
                | Error::NegativeMode(_)
                | Error::InvalidParameter(_)
                | Error::OutOfRange { .. }
                | Error::Config { .. }
                | Error::Manifest(_)
                | Error::Indefinite { .. }
                | Error::DegenerateSigma { .. }
                | Error::NonConstantWeight
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
