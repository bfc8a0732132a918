use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("product of two monodromic classes is outside the symbolic subring")]
    OutsideSymbolicSubring,
    #[error("state space too large: about {estimate:.3e} states, limit {limit:.3e}")]
    SizeLimit { estimate: f64, limit: f64 },
    #[error("prime {p} not admissible: {reason}")]
    BadPrime { p: u32, reason: String },
    #[error("odd power of u in an exact evaluation")]
    OddHalfPower,
    #[error("normalization exponent is a half-integer")]
    HalfPowerResidue,
    #[error("tail bound {bound:.3e} exceeds tolerance {tol:.3e}")]
    TailTooLarge { bound: f64, tol: f64 },
    #[error("interpolated polynomial fails at verification prime {p}")]
    NotPolynomial { p: u32 },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("sigma needs integer coefficients, got {0}")]
    NonIntegerCoefficient(String),
    #[error("operation not defined on truncated expressions: {0}")]
    Truncated(&'static str),
    #[error("not enough Adams levels: need {need}, have {have}")]
    Levels { need: usize, have: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("cache entry {0} failed its checksum")]
    CacheCorrupt(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
