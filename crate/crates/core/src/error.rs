use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("arity error at column {col}: {msg}")]
    Arity { col: usize, msg: String },
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not a classical formula: {0}")]
    NotClassical(String),
    #[error("invalid occurrence path: {0}")]
    InvalidPath(String),
    #[error("closure condition violated: {0}")]
    Closure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
