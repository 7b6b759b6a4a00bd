use thiserror::Error;

/// Errors raised by mechanism construction, evaluation and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bid list is empty")]
    EmptyBids,

    #[error("outcome set is empty")]
    EmptyOutcomes,

    #[error("piece list is empty")]
    EmptyPieces,

    #[error("{field}: not a probability vector (sum {sum}, min entry {min})")]
    NotOnSimplex { field: String, sum: f64, min: f64 },

    #[error("{field}: expected dimension {expected}, got {got}")]
    DimensionMismatch { field: String, expected: usize, got: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("{name} fails the subgradient inequality at p={p:?}, q={q:?} (violation {violation:e})")]
    NotConvex {
        name: String,
        p: Vec<f64>,
        q: Vec<f64>,
        violation: f64,
    },

    #[error("{name} claimed non-convex but passed the subgradient grid test")]
    ConvexityClaimRefuted { name: String },

    #[error("welfare at outcome {outcome} is not component-wise convex in bidder {bidder}: {detail}")]
    NotComponentWiseConvex {
        outcome: String,
        bidder: usize,
        detail: String,
    },

    #[error("bidder {bidder}: state {state} is not in the state set of outcome {outcome}")]
    UnknownState {
        bidder: usize,
        outcome: String,
        state: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("{what} exceeds guard ({count} > {limit})")]
    GuardExceeded { what: String, count: usize, limit: usize },

    #[error("no path from {source_node} to {sink}")]
    NoPath { source_node: String, sink: String },

    #[error("unknown welfare function {0:?}")]
    UnknownWelfare(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
