//! Rényi-entropy decoupling at desk scale.
//!
//! Dense labeled operators, Rényi divergences and conditional entropies,
//! Kraus maps with the Θ functional, exact and sampled unitary twirls,
//! one-shot and n-copy decoupling bounds, and simulations of the protocols
//! built on them (compression, state redistribution style transfers,
//! merging and correlation destruction).
//!
//! All logarithms are base 2.

pub mod channels;
pub mod cli;
pub mod decouple;
pub mod entropy;
pub mod protocols;
pub mod qmat;
pub mod twirl;

#[cfg(test)]
mod proptests;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label `{0}` appears twice")]
    LabelCollision(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("operator is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("bad trace {0}")]
    BadTrace(f64),
    #[error("not a partial isometry: {0}")]
    NotPartialIsometry(String),
    #[error("{0}")]
    Domain(String),
    #[error("dimension {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("unitaries {0} and {1} are not trace-orthogonal")]
    NotOrthogonal(usize, usize),
    #[error("config: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
