use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        message: String,
        /// Byte range in the source.
        span: (usize, usize),
        line: usize,
        column: usize,
    },

    #[error("nonpositive weight value {value} at level {level}, index {index}")]
    NonPositive {
        level: u32,
        index: String,
        value: String,
    },

    #[error("(W1) violated: index {index} has infinite weight at every level up to {levels}")]
    W1 { index: String, levels: u32 },

    #[error("(W2) violated: v_{next}({index}) > v_{level}({index})", next = level + 1)]
    W2 { level: u32, index: String },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("index {index} is not in the index set {set}")]
    NotInIndexSet { index: String, set: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eventually bounded: v_{level} is bounded by {bound}, so no unbounded witness exists")]
    EventuallyBounded { level: u32, bound: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no (W3) certificate covers level {0}")]
    NoW3Certificate(u32),

    #[error("support size {size} exceeds the sign-pattern guard J_max = {j_max}")]
    ResourceGuard { size: usize, j_max: u32 },
}
