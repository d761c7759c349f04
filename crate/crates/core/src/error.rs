use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) has invalid weight {weight}")]
    InvalidWeight { u: usize, v: usize, weight: f64 },
    #[error("node {0} already removed")]
    AlreadyRemoved(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("infeasible spec: {edges} edges requested but a simple graph on {n} nodes holds at most {capacity}")]
    Infeasible {
        n: usize,
        edges: usize,
        capacity: usize,
    },
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph { line: usize, source: GraphError },
    #[error("missing node count header")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("curve kinds differ")]
    KindMismatch,
    #[error("batch fraction {0} outside (0, 1)")]
    FractionOutOfRange(f64),
    #[error("invalid attack trace: {0}")]
    InvalidTrace(#[from] GraphError),
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("empty curve")]
    EmptyCurve,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is not symmetric: |m[{row}][{col}] - m[{col}][{row}]| = {gap:e}")]
    Asymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
}
