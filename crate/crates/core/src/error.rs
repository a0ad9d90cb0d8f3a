use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation: {0}")]
    Validation(String),

    #[error("need at least 2 segments to cluster, got {0}")]
    TooFewSegments(usize),

    #[error("matrix shape mismatch: expected {expected}x{expected}, got {got}x{got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("node {0} is isolated (zero affinity row sum)")]
    IsolatedNode(usize),

    #[error("cannot form {k} clusters from {n} points")]
    TooFewPoints { n: usize, k: usize },

    #[error("eigenvalue sequence of length {len} too short for max_speakers {max_speakers}")]
    EigenvalueSequenceTooShort { len: usize, max_speakers: usize },

    #[error("recording id mismatch: reference '{reference}' vs hypothesis '{hypothesis}'")]
    RecordingMismatch {
        reference: String,
        hypothesis: String,
    },

    #[error("recording sets differ: {0}")]
    CoverageMismatch(String),

    #[error("infeasible fixture spec: {0}")]
    InfeasibleFixture(String),

    #[error("wav: {0}")]
    Wav(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
