use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("point label `{0}` is already bound in the functional")]
    LabelCollision(String),
    #[error("index `{0}` is already contracted")]
    IndexContracted(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("rewrite did not terminate within {0} iterations")]
    IterationCap(usize),
    #[error("unknown rewrite rule `{0}`")]
    UnknownRule(String),
    #[error("eta solve failed: {0}")]
    EtaSolve(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
