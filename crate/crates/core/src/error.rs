use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic: expected \"HAST\"")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("unsupported dtype {0}")]
    UnsupportedDtype(u8),
    #[error("unsupported rank {0}")]
    UnsupportedRank(u8),
    #[error("reserved header byte must be zero, found {0}")]
    ReservedByte(u8),
    #[error("truncated header")]
    TruncatedHeader,
    #[error("truncated data")]
    TruncatedData,
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("non-finite value at element {0}")]
    NonFinite(usize),
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error("channel mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("empty accumulator: no pixels have been accumulated")]
    EmptyAccumulator,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no positive activation")]
    DegenerateCam,
    #[error("empty foreground")]
    EmptyForeground,
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("empty record list")]
    EmptyRecords,
    #[error("training diverged: loss is not finite in epoch {0}")]
    Diverged(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
