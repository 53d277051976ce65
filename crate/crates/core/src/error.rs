use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("π-degree {0} exceeds the cap")]
    DegreeOverflow(u32),
    #[error("negative power of π")]
    NegativePiPower,
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("Clifford dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u8, u8),
    #[error("trace needs an even dimension, got {0}")]
    OddDimension(u8),
    #[error("symbolic index left in a literal word")]
    SymbolicIndex,
    #[error("index {0} appears {1} times")]
    IndexMultiplicity(String, usize),
    #[error("free index {0} in a closed expression")]
    FreeIndex(String),
    #[error("rational function does not decay fast enough (decay {0}, need <= {1})")]
    InsufficientDecay(i64, i64),
    #[error("multi-index order {0} exceeds the engine bound")]
    MomentBound(u32),
    #[error("surviving imaginary coefficient {0}")]
    ImaginaryResidue(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("fixture error at {file}:{line}: {msg}")]
    Fixture { file: String, line: usize, msg: String },
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("quadrature did not converge (error estimate {0:e})")]
    Quadrature(f64),
    #[error("config error at {file}:{line}: {msg}")]
    Config { file: String, line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
