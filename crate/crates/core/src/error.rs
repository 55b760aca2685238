use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid merge tree: {}", .0.join("; "))]
    InvalidTree(Vec<String>),

    #[error("malformed tree structure: {0}")]
    Structure(String),

    #[error("invalid subtree reference ({child:?}, {ancestor:?})")]
    InvalidRef {
        child: Option<usize>,
        ancestor: Option<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("assignment solver failed: {0}")]
    Solver(String),

    #[error("compute budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("member {name}: {source}")]
    Member {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("image encoding failed: {0}")]
    Image(#[from] image::ImageError),
}
