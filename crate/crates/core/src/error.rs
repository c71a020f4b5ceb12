use std::path::PathBuf;

/// Errors produced by the extraction pipeline and its stages.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed token at index {index}: {token:?} has an empty surface")]
    MalformedToken { index: usize, token: String },

    #[error("word {word:?} occurs {count} time(s); at least {required} occurrences are needed")]
    InsufficientFrequency {
        word: String,
        count: usize,
        required: usize,
    },

    #[error("no difference vector for word {word:?} on the {side} side")]
    MissingVector { word: String, side: &'static str },

    #[error("difference vector for {word:?} is empty")]
    EmptyDiffVector { word: String },

    #[error("binary vectors have mismatched dimensions: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("score undefined: vectors share no segment")]
    UndefinedScore,

    #[error("anchor points are not monotone at index {index}: ({i}, {j}) after ({prev_i}, {prev_j})")]
    NonMonotoneAnchors {
        index: usize,
        i: usize,
        j: usize,
        prev_i: usize,
        prev_j: usize,
    },

    #[error("position {position} is outside the {side} text of length {len}")]
    PositionOutOfBounds {
        side: &'static str,
        position: usize,
        len: usize,
    },

    #[error("segment index {index} out of range for {count} segments")]
    SegmentOutOfRange { index: usize, count: usize },

    #[error("no source nouns survived the tag filter")]
    NoSourceNouns,

    #[error("{path}: corpus is empty")]
    EmptyCorpus { path: PathBuf },

    #[error("invalid config entry {key:?}: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: malformed {what} at line {line}: {reason}")]
    Format {
        path: PathBuf,
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for mistakes in how the tool was invoked or configured, as
    /// opposed to problems with the data itself.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
