use thiserror::Error;

/// Errors raised while building or mutating a [`crate::model::Relaxation`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("variable {var} has empty domain")]
    EmptyDomain { var: usize },
    #[error("expected {expected} unary tables, got {got}")]
    UnaryCount { expected: usize, got: usize },
    #[error("table for scope {scope:?} has {got} entries, expected {expected}")]
    DimensionMismatch {
        scope: Vec<usize>,
        expected: usize,
        got: usize,
    },
    #[error("variable {var} out of range (num_vars = {num_vars})")]
    UnknownVariable { var: usize, num_vars: usize },
    #[error("self-loop on variable {var}")]
    SelfLoop { var: usize },
    #[error("duplicate edge {{{u}, {v}}}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("triplet variables must be distinct, got {vars:?}")]
    NonDistinct { vars: Vec<usize> },
    #[error("labeling has {got} entries, model has {expected} variables")]
    LabelingLength { expected: usize, got: usize },
    #[error("label {label} out of range for variable {var} (domain size {size})")]
    InvalidLabel { var: usize, label: usize, size: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReparamError {
    #[error("message vector has {got} edges, model has {expected}")]
    EdgeCount { expected: usize, got: usize },
    #[error("message on edge {edge} has length {got}, expected {expected}")]
    MessageLength {
        edge: usize,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CspError {
    #[error("label {label} is not in the current domain of variable {var}")]
    LabelNotInDomain { var: usize, label: usize },
    #[error("variable {var} is not part of the instance")]
    UnknownVariable { var: usize },
    #[error("trace does not end in a wipeout")]
    NoWipeout,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrustratedError {
    #[error("cycle needs at least 3 distinct variables, got {len}")]
    CycleTooShort { len: usize },
    #[error("cycle repeats variable {var}")]
    RepeatedVariable { var: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("graph has a cycle")]
    Cyclic,
    #[error("graph has {0} sinks, expected exactly one")]
    Sinks(usize),
    #[error("factor {scope:?} required by the trace is missing from the model")]
    MissingFactor { scope: Vec<usize> },
    #[error("trace does not match the model: {0}")]
    TraceMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance has {count} labelings, limit is {limit}")]
    TooLarge { count: f64, limit: f64 },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

/// Input parsing failures; line numbers are 1-based.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("unsupported network type `{0}` (only MARKOV is accepted)")]
    UnsupportedNetwork(String),
    #[error("factor {index} with scope {scope:?} has arity {arity}; only unary and pairwise factors are supported")]
    UnsupportedArity {
        index: usize,
        scope: Vec<usize>,
        arity: usize,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input: {0}")]
    UnexpectedEof(String),
    #[error("empty input")]
    Empty,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bound trace is not monotone at row {row}: {prev} > {next}")]
    NonMonotoneTrace { row: usize, prev: f64, next: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
