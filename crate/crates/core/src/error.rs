use thiserror::Error;

/// Errors raised by the estimators and the fixed-point engine.
///
/// Real-valued payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("non-finite coordinate in input")]
    NonFinite,

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("exhaustive k-center search over {size} points exceeds the cap of {cap}; use greedy mode")]
    ExhaustiveCapExceeded { size: usize, cap: usize },

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("codomain dimension mismatch: {left} vs {right}")]
    CodomainMismatch { left: usize, right: usize },

    #[error("node subset is empty")]
    EmptySubset,

    #[error("saturating level {level} out of range 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("delta {delta} is below one grid spacing {spacing}; no neighbour pairs")]
    DeltaBelowSpacing { delta: f64, spacing: f64 },

    #[error("function takes negative value {value} at node {node}")]
    NegativeValue { node: usize, value: f64 },

    #[error("no grid node lies in the ball of radius {radius}; grid too coarse")]
    EmptyBall { radius: f64 },

    #[error("no (K2) radius in scan range")]
    NoRadiusInScanRange,

    #[error("iteration diverged at step {iteration} (residual {residual})")]
    Diverged { iteration: usize, residual: f64 },

    #[error("all {trials} trials were degenerate (zero input chi0)")]
    AllTrialsDegenerate { trials: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
