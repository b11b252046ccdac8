use thiserror::Error;

/// Errors produced by instance handling, the LP layer and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("commodity {commodity}: invalid path: {reason}")]
    InvalidPath { commodity: usize, reason: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed linear program: {0}")]
    LpShape(String),

    #[error("linear program is infeasible ({context})")]
    LpInfeasible { context: String },

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("capacity restriction on arc {arc} has negative right-hand side {rhs}: infeasible by construction")]
    RestrictionInfeasible { arc: usize, rhs: f64 },

    #[error("flow conservation violated for group {group} at node {node} (residual {residual:.3e})")]
    Conservation {
        group: usize,
        node: usize,
        residual: f64,
    },

    #[error("commodity {commodity} has an empty path support")]
    EmptySupport { commodity: usize },

    #[error("no path from node {origin} to node {destination}")]
    Unreachable { origin: usize, destination: usize },

    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
