use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal too short: {len} samples, need at least {needed}")]
    TooShort { len: usize, needed: usize },

    #[error("unsupported sample rate {0} Hz, expected 16000")]
    SampleRate(u32),

    #[error("expected {expected} frequency bins, got {found}")]
    BinCount { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parameter `{name}`: expected shape {expected:?}, found {found:?}")]
    ParamShape {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("missing parameter `{0}`")]
    MissingParam(String),

    #[error("non-finite value in frame {frame}")]
    NonFinite { frame: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("training diverged at step {0}")]
    Diverged(usize),

    #[error("weight file: {0}")]
    Weights(#[from] WeightFileError),

    #[error("wav: {0}")]
    Wav(#[from] WavError),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    /// Attaches a file path to an error.
    pub fn at(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping file context.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } => source.root(),
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum WeightFileError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("file truncated")]
    Truncated,
    #[error("malformed header: {0}")]
    Header(String),
    #[error("unsupported dtype `{0}`")]
    Dtype(String),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("tensor `{0}` lies outside the payload")]
    OutOfBounds(String),
    #[error("duplicate tensor `{0}`")]
    Duplicate(String),
    #[error("tensor `{0}` holds non-finite values")]
    NonFinite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum WavError {
    #[error("unsupported sample rate {0} Hz, expected 16000")]
    SampleRate(u32),
    #[error("expected mono audio, got {0} channels")]
    Channels(u16),
    #[error("expected 16-bit integer PCM, got {bits}-bit {format}")]
    SampleFormat { bits: u16, format: &'static str },
    #[error("malformed RIFF/WAVE data: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
