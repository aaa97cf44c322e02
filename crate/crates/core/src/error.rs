use thiserror::Error;

/// Errors raised by graph construction, the discrete calculus and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("duplicate vertex id {0:?}")]
    DuplicateVertex(String),

    #[error("vertex {id:?} has non-positive or non-finite measure {mu}")]
    InvalidMeasure { id: String, mu: f64 },

    #[error("edge #{index} ({u:?}, {v:?}) references unknown vertex {missing:?}")]
    UnknownEdgeVertex {
        index: usize,
        u: String,
        v: String,
        missing: String,
    },

    #[error("edge #{index} ({u:?}, {v:?}) is a self-loop")]
    SelfLoop { index: usize, u: String, v: String },

    #[error("edge #{index} ({u:?}, {v:?}) duplicates an earlier edge between the same vertices")]
    DuplicateEdge { index: usize, u: String, v: String },

    #[error("edge #{index} ({u:?}, {v:?}) has non-positive or non-finite weight {w}")]
    InvalidWeight {
        index: usize,
        u: String,
        v: String,
        w: f64,
    },

    #[error("graph is disconnected: vertex {unreachable:?} is not reachable from {root:?}")]
    Disconnected { root: String, unreachable: String },

    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),

    #[error("vertex function has {got} values but the graph has {expected} vertices")]
    DomainMismatch { expected: usize, got: usize },

    #[error("vertex function has a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "Poisson source is incompatible: integral {integral:e} exceeds tolerance {tolerance:e}"
    )]
    IncompatibleSource { integral: f64, tolerance: f64 },

    #[error("linear solve did not converge: residual {residual:e} after {iterations} iterations")]
    LinearSolve { residual: f64, iterations: usize },

    #[error("no solved coupling found below the doubling cap {cap}")]
    DoublingCap { cap: f64 },

    #[error("graph file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
