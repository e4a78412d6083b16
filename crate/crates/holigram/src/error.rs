use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file. `line` is 1-based; 0 means the whole file.
    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("empty vocabulary: no token occurs at least {min_count} times")]
    EmptyVocabulary { min_count: u64 },

    #[error("out-of-vocabulary word: {0}")]
    Oov(String),

    /// Caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A training run or experiment failed at runtime.
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Input/usage errors get exit code 2, runtime failures exit code 1.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Parse { .. } | Error::Oov(_) | Error::Contract(_)
        )
    }
}
