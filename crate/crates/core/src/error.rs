//! Error type shared by every stage of the pipeline.

use alloc::string::String;
use alloc::vec::Vec;

/// Failure modes. Variants name the offending simplex where one exists.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("open boundary: edge ({0}, {1}) has a single incident face")]
    OpenBoundary(usize, usize),
    #[error("non-manifold edge ({0}, {1}) with {2} incident faces")]
    NonManifoldEdge(usize, usize, usize),
    #[error("non-manifold vertex {0}: link is not a single cycle")]
    NonManifoldVertex(usize),
    #[error("non-orientable: face {0} is inconsistently oriented")]
    NonOrientable(usize),
    #[error("mesh has {0} connected components")]
    Disconnected(usize),
    #[error("corrupted mesh: {0}")]
    CorruptedMesh(String),
    #[error("degenerate metric: triangle inequality fails in {} face(s), first {:?}", .faces.len(), .faces.first())]
    DegenerateMetric { faces: Vec<usize> },
    #[error("solver failure: {what} (residual {residual:e})")]
    SolverFailure { what: String, residual: f64 },
    #[error("topology mismatch: expected {expected} harmonic forms, found {found}")]
    TopologyMismatch { expected: usize, found: usize },
    #[error("degenerate nodal set: {near_zero} of {total} vertices on a zero plateau")]
    DegenerateNodalSet { near_zero: usize, total: usize },
    #[error("internal consistency: {0}")]
    InternalConsistency(String),
    #[error("step size: {0}")]
    StepSize(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("property violation: {0}")]
    PropertyViolation(String),
    #[error("proposition violation: {0}")]
    PropositionViolation(String),
}

impl Error {
    /// True for errors that signal a mathematical bug rather than bad input.
    pub fn is_violation(&self) -> bool {
        matches!(self, Error::PropertyViolation(_) | Error::PropositionViolation(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
