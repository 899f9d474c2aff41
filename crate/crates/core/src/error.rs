use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the codec library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed wav: {0}")]
    Wav(String),
    #[error("unsupported pcm input: {0}")]
    UnsupportedPcm(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("length mismatch: original has {original} samples, decoded has {decoded}")]
    LengthMismatch { original: usize, decoded: usize },
    #[error("signal of {len} samples is shorter than one {segment_len}-sample segment")]
    TooShort { len: usize, segment_len: usize },
    #[error("degenerate levinson-durbin recursion at order {order}")]
    DegenerateRecursion { order: usize },
    #[error("non-finite training loss")]
    NonFiniteLoss,
    #[error("not an AHPC stream")]
    BadMagic,
    #[error("unsupported stream version {0}")]
    BadVersion(u16),
    #[error("malformed stream header: {0}")]
    BadHeader(String),
    #[error("tunables digest mismatch: stream {stream:016x}, decoder {decoder:016x}")]
    DigestMismatch { stream: u64, decoder: u64 },
    #[error("truncated payload")]
    Truncated,
    #[error("malformed manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "E_IO",
            Error::Wav(_) => "E_WAV",
            Error::UnsupportedPcm(_) => "E_PCM",
            Error::InvalidSignal(_) => "E_SIGNAL",
            Error::InvalidConfig(_) => "E_CONFIG",
            Error::LengthMismatch { .. } => "E_LENGTH",
            Error::TooShort { .. } => "E_SHORT",
            Error::DegenerateRecursion { .. } => "E_LEVINSON",
            Error::NonFiniteLoss => "E_NONFINITE",
            Error::BadMagic => "E_MAGIC",
            Error::BadVersion(_) => "E_VERSION",
            Error::BadHeader(_) => "E_HEADER",
            Error::DigestMismatch { .. } => "E_DIGEST",
            Error::Truncated => "E_TRUNCATED",
            Error::Manifest { .. } => "E_MANIFEST",
            Error::Csv(_) => "E_CSV",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
