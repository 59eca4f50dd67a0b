//! Error type shared by all library modules.

use alloc::boxed::Box;
use alloc::string::String;

use crate::allocators::PowerAllocation;

#[derive(Debug, Clone, thiserror::Error)]
pub enum CoreError {
    /// A configuration field failed validation.
    #[error("invalid config field `{field}`: {message}")]
    InvalidConfig { field: &'static str, message: String },

    /// Entity placement cannot satisfy the geometric constraints.
    #[error("placement infeasible: {0}")]
    PlacementInfeasible(String),

    /// An argument lies outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two points that must be distinct coincide, so a direction or a
    /// distance-scaled gain is undefined.
    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    /// A matrix that must be invertible is rank deficient or its condition
    /// number exceeds the guard threshold.
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// A numeric routine (decomposition, factorization) failed to produce a
    /// result.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// An iterative solver hit its iteration cap before meeting tolerance.
    /// Carries the last feasible iterate when one was seen.
    #[error(
        "convergence failure after {iterations} iterations \
         (worst constraint violation {max_violation_w} W)"
    )]
    ConvergenceFailure {
        iterations: usize,
        max_violation_w: f64,
        best_feasible: Option<Box<PowerAllocation>>,
    },

    /// A computed quantity is NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFiniteValue(&'static str),
}

impl CoreError {
    pub fn invalid_config(field: &'static str, message: impl Into<String>) -> Self {
        Self::InvalidConfig {
            field,
            message: message.into(),
        }
    }
}
