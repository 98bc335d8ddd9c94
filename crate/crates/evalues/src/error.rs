use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{family}: mean parameter {value} outside mean space {space}")]
    Domain {
        family: &'static str,
        value: f64,
        space: String,
    },
    #[error("{family}: natural parameter {value} outside natural space {space}")]
    NaturalDomain {
        family: &'static str,
        value: f64,
        space: String,
    },
    #[error("{family}: observation {value} outside support {support}")]
    Support {
        family: &'static str,
        value: f64,
        support: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("mixture refused: {0}")]
    Uncertified(String),
    #[error("iteration {iteration}: {message}")]
    Iteration { iteration: usize, message: String },
    #[error("stream state: {0}")]
    Stream(String),
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
