use thiserror::Error;

/// Errors produced by the analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {0}")]
    Degenerate(String),

    #[error("vertex {vertex} has a non-manifold (pinched) patch")]
    NonManifold { vertex: usize },

    #[error("edge {{{0}, {1}}} is not an interior edge")]
    BoundaryEdge(usize, usize),

    #[error("vertices {0} and {1} are not joined by a mesh edge")]
    NoSuchEdge(usize, usize),

    #[error("vertex {0} is a boundary vertex; an interior vertex is required")]
    BoundaryVertex(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("target has length {got}, patch has {expected} triangles")]
    LengthMismatch { expected: usize, got: usize },

    #[error("vertex {0} is not a local interpolating vertex")]
    NotLocalInterpolating(usize),

    #[error("target violates the alternating constraint at singular vertex {vertex} (residual {residual:e})")]
    Inadmissible { vertex: usize, residual: f64 },

    #[error("edge {{{from}, {to}}} is not acceptable: |M| = {weight:e}")]
    Unacceptable { from: usize, to: usize, weight: f64 },

    #[error("vertex {0} is singular on the boundary; use the local interpolant")]
    SingularBoundary(usize),

    #[error("not a path: {0}")]
    NotAPath(String),

    #[error("tree cover leaves {} vertices uncovered", .0.len())]
    IncompleteCover(Vec<usize>),

    #[error("domain is not simply connected (T - E + V = {0})")]
    NotSimplyConnected(i64),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("rank is indeterminate: singular-value gap {gap:.3e} below 10")]
    RankIndeterminate { gap: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
