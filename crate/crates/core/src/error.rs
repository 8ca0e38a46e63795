use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Header or file layout does not match the CSIT format.
    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: header declares {expected} bytes, file holds {found}")]
    Truncation { expected: u64, found: u64 },

    /// Non-finite gain in a payload. Indices are absolute sample/antenna/subcarrier.
    #[error("non-finite channel gain at (t={t}, n={n}, f={f})")]
    Data { t: usize, n: usize, f: usize },

    #[error("timestamps not strictly increasing at record {record}: {prev} s then {t} s")]
    Order { record: usize, prev: f64, t: f64 },

    #[error("{what} out of range: {value}")]
    Range { what: String, value: f64 },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("power delay profile has no positive bin")]
    NullProfile,

    #[error("window {window} still has a zero bin after floor regularization")]
    NullBin { window: usize },

    #[error("antenna element {element} has zero variance in the correlation window")]
    DegenerateElement { element: usize },

    #[error("invalid synthesis spec: {0}")]
    Spec(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Failure inside one step of the analysis pipeline.
    #[error("{module}: {op}: {source}")]
    Stage {
        module: &'static str,
        op: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn range(what: impl Into<String>, value: f64) -> Self {
        Error::Range {
            what: what.into(),
            value,
        }
    }

    /// Tags the error with the pipeline step it came from.
    pub fn in_stage(self, module: &'static str, op: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                module,
                op,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by the caller's input files or parameters, as
    /// opposed to failures inside a computation.
    pub fn is_input_error(&self) -> bool {
        if let Error::Stage { source, .. } = self {
            return source.is_input_error();
        }
        matches!(
            self,
            Error::Io { .. }
                | Error::Format(_)
                | Error::Truncation { .. }
                | Error::Data { .. }
                | Error::Order { .. }
                | Error::Range { .. }
                | Error::Index(_)
                | Error::DegenerateInput(_)
                | Error::Spec(_)
                | Error::Parse { .. }
        )
    }
}
