use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("variable `{0}` has no image in the substitution")]
    UnmappedVariable(String),
    #[error("unknown world {0}")]
    UnknownWorld(usize),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid pre-tree: {0}")]
    InvalidTree(String),
    #[error("bounds below existing maxima: {0}")]
    Bounds(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("fragment budget exhausted: no index below {0} remains")]
    BudgetExhausted(usize),
    #[error("inconsistent base theory")]
    InconsistentBase,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
