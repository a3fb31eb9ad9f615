use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis state: {0}")]
    InvalidState(String),
    #[error("truncation at cutoff {cutoff} has dimension {dim}, above the limit {limit}")]
    DimensionLimit { cutoff: String, dim: usize, limit: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("tensor factor mismatch: {0}")]
    FactorMismatch(String),
    #[error("moduli outside the admissible region: {0}")]
    Moduli(String),
    #[error("sector mismatch on sewn circles: {0}")]
    SectorMismatch(String),
    #[error("sewing would produce a closed surface")]
    ClosedSurface,
    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),
    #[error("linear algebra failure: {0}")]
    Numerical(String),
    #[error("invalid domain: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
