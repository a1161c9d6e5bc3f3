use core::fmt;

/// Errors produced by the clustering core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An edge or label referenced a vertex outside `0..n`.
    VertexOutOfRange { index: usize, n_vertices: usize },
    /// An edge connected a vertex to itself.
    SelfLoop(usize),
    /// The same unordered pair was given twice.
    DuplicateEdge(usize, usize),
    /// Edge weights must be finite and non-negative.
    InvalidWeight { i: usize, j: usize, w: f64 },
    /// Two operands disagree on a dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A vertex function was empty where at least one value is needed.
    Empty,
    /// A cluster column became constant, so its balance term vanished.
    DegenerateCluster { cluster: usize },
    /// A partition left a class without members.
    EmptyClass(usize),
    /// A class index was not below the number of classes.
    ClassOutOfRange { class: usize, n_classes: usize },
    /// Conjugate gradient stopped before reaching the residual tolerance.
    NoConvergence { iterations: usize, residual: f64 },
    /// A scalar parameter was outside its admissible range.
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::VertexOutOfRange { index, n_vertices } => {
                write!(f, "vertex {index} out of range for {n_vertices} vertices")
            }
            Error::SelfLoop(i) => write!(f, "self-loop at vertex {i}"),
            Error::DuplicateEdge(i, j) => write!(f, "duplicate edge ({i}, {j})"),
            Error::InvalidWeight { i, j, w } => write!(f, "invalid weight {w} on edge ({i}, {j})"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Empty => write!(f, "empty vertex function"),
            Error::DegenerateCluster { cluster } => {
                write!(f, "cluster {cluster} is constant (zero balance term)")
            }
            Error::EmptyClass(r) => write!(f, "class {r} has no members"),
            Error::ClassOutOfRange { class, n_classes } => {
                write!(f, "class {class} out of range for {n_classes} classes")
            }
            Error::NoConvergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}
