//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not a rank-1 projector (deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("state vector cannot be normalized (norm {norm:.3e})")]
    UnnormalizableState { norm: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operators do not resolve the identity (deviation {deviation:.3e})")]
    IncompleteSet { deviation: f64 },

    #[error("no solution: {detail} (residual {residual:.3e})")]
    NoSolution { detail: String, residual: f64 },

    #[error(
        "stage {stage} is infeasible: the accumulated continue operator is singular and the \
         target element acts outside its image; permuting the outcome order may help"
    )]
    SingularStage { stage: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
