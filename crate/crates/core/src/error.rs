use std::path::PathBuf;

use thiserror::Error;

/// Every failure the pipeline can report.
///
/// Variants are grouped by the stage that raises them. The CLI maps
/// [`Error::Usage`] to exit code 1 and everything else to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    // signal
    #[error("signal is empty")]
    EmptySignal,
    #[error("frame has no periodicity above threshold")]
    NoPeriodicity,
    #[error("harmonic not found near {freq_hz:.1} Hz")]
    HarmonicNotFound { freq_hz: f64 },
    #[error("frame is silent (RMS = 0)")]
    SilentFrame,
    #[error("calibration input is degenerate: {0}")]
    DegenerateCalibration(&'static str),
    #[error("harmonic at {freq_hz:.1} Hz is at or above Nyquist ({nyquist_hz:.1} Hz)")]
    AliasedHarmonic { freq_hz: f64, nyquist_hz: f64 },
    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    // features
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("need at least {needed} voiced frames, got {got}")]
    InsufficientVoicing { needed: usize, got: usize },
    #[error("need {needed} valid days, have {got}")]
    NotEnoughDays { needed: usize, got: usize },
    #[error("no window with enough voicing after {attempts} attempts")]
    WindowSearchExhausted { attempts: usize },

    // model / eval
    #[error("training data contains a single class")]
    SingleClass,
    #[error("class {class} has {size} members, fewer than {folds} folds")]
    ClassTooSmall { class: &'static str, size: usize, folds: usize },

    // stats
    #[error("pooled standard deviation is zero")]
    ZeroPooledStd,
    #[error("both samples have zero variance")]
    DegenerateVariance,
    #[error("input is constant")]
    ConstantInput,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("marginal gain stays above threshold for {horizon} days")]
    NotReached { horizon: u32 },

    // io
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate subject id {0:?}")]
    DuplicateSubject(String),
    #[error("field recording {path:?} of subject {subject:?} has no day index")]
    MissingDayIndex { subject: String, path: String },
    #[error("recording path does not exist: {0}")]
    UnresolvablePath(PathBuf),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt WAV header: {0}")]
    CorruptHeader(String),
    #[error("unexpected CSV header: {0}")]
    SchemaMismatch(String),
    #[error("results schema version {found} does not match supported version {expected}")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
