use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("semantic error: {0}")]
    Semantic(String),
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("enumeration cap exceeded: {needed} free spins, cap {cap}")]
    CapExceeded { needed: usize, cap: usize },
    #[error("size overflow: {0}")]
    SizeOverflow(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no exact gadget on the quarter-turn lattice: {0}")]
    NoSolution(String),
    #[error("inconsistent constraints: {0}")]
    Inconsistent(String),
    #[error("singular fit: {0}")]
    SingularFit(String),
    #[error("embedding failed: {0}")]
    Embedding(String),
}

pub type Result<T> = std::result::Result<T, Error>;
