use thiserror::Error;

/// Errors raised anywhere in the design pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("nuisance block of the information matrix is singular")]
    SingularNuisanceBlock,

    #[error("objective returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("reference design has zero determinant")]
    DegenerateReference,

    #[error("no start point produced a nonsingular information matrix")]
    SingularThroughout,

    #[error("all support points were dropped")]
    EmptyDesign,

    #[error("expanded support collides at t = {t}")]
    CollidingPoints { t: f64 },

    #[error("expanded support point t = {t} lies outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("unsupported expansion size: {0}")]
    UnsupportedSize(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
