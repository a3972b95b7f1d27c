//! Density-matrix simulation of blind catalytic quantum error correction.
//!
//! A target state is sent through a dephasing, depolarizing and amplitude-damping
//! channel. A blind strategy estimates the target from the noisy state, and the
//! estimate is recovered by PSD projection restricted to the coherence modes the
//! noisy state still carries. The `bench` module drives the parameter sweeps.

pub mod bench;
pub mod circuitsim;
pub mod core_linalg;
pub mod estimators;
pub mod fitting;
pub mod noise;
pub mod qem;
pub mod recovery;
pub mod targets;
pub mod vqe;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is {0}x{1}, not square")]
    NotSquare(usize, usize),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, not 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}
