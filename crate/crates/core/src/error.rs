use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid diagram: {0}")]
    Diagram(String),
    #[error("invalid chain complex: {0}")]
    Complex(String),
    #[error("invalid chain map: {0}")]
    ChainMap(String),
    #[error("filtration error: {0}")]
    Filtration(String),
    #[error("invalid movie: {0}")]
    Movie(String),
    #[error("sign assignment failed: {0}")]
    Signs(String),
    #[error("check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;
