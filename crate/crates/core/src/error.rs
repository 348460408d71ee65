use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed WAV file {path}: {reason}")]
    MalformedWav { path: PathBuf, reason: String },
    #[error("unsupported WAV encoding in {path}: {encoding} (expected 16-bit integer PCM)")]
    UnsupportedEncoding { path: PathBuf, encoding: String },
    #[error("unsupported channel count in {path}: {channels} (expected mono)")]
    UnsupportedChannels { path: PathBuf, channels: u16 },
    #[error("unsupported sample rate in {path}: {rate} Hz (expected 16000 Hz)")]
    UnsupportedSampleRate { path: PathBuf, rate: u32 },
    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),
    #[error("signal too short: {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("missing front-end model for {0}")]
    MissingModel(&'static str),

    #[error("too few frames: {frames} for {components} components (need at least {needed})")]
    TooFewFrames {
        frames: usize,
        components: usize,
        needed: usize,
    },
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("insufficient utterances: {have} for rank {rank}")]
    InsufficientUtterances { have: usize, rank: usize },
    #[error("singular accumulator for component {component}")]
    SingularAccumulator { component: usize },
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),
    #[error("zero vector after centering")]
    ZeroAfterCentering,
    #[error("cannot fuse i-vectors: {0}")]
    Fusion(&'static str),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("empty class: {0}")]
    EmptyClass(&'static str),
    #[error("utterance {0} not found in manifest")]
    UnmatchedUtterance(String),
    #[error("invalid model container: {0}")]
    Container(String),
    #[error("unknown section {0:?} in model container")]
    UnknownSection(String),
    #[error("missing section {0:?} in model container")]
    MissingSection(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
