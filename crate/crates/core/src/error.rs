use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric argument is outside the domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// The least-squares design matrix is singular or the data do not
    /// constrain the parameters.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// A steady-state trace whose minimum is not positive.
    #[error("degenerate trace: {0}")]
    DegenerateTrace(String),

    #[error("config error for key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("ingest error in {path} at row {row}: {msg}")]
    Ingest {
        path: PathBuf,
        row: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable process exit code: 1 config, 2 numeric, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            Error::Domain { .. } | Error::DegenerateFit(_) | Error::DegenerateTrace(_) => 2,
            Error::Ingest { .. } | Error::Io { .. } => 3,
        }
    }

    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::DegenerateTrace(_) => "degenerate_trace",
            Error::Config { .. } => "config",
            Error::Ingest { .. } => "ingest",
            Error::Io { .. } => "io",
        }
    }
}
