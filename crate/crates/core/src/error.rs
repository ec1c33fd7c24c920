use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    /// Manifest validation failure, pinned to a trial and field where possible.
    #[error("manifest: trial `{trial_id}`, field `{field}`: {msg}")]
    Manifest {
        trial_id: String,
        field: String,
        msg: String,
    },

    #[error("channel set mismatch: missing {missing:?}, unexpected {unexpected:?}")]
    ChannelSet {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },

    #[error("non-finite sample at row {row}, channel {channel}")]
    NonFinite { row: usize, channel: String },

    #[error("sample count {found} does not match duration (expected {expected})")]
    SampleCount { expected: usize, found: usize },

    #[error("input too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("trial unusable: rejection ratio {ratio:.3} exceeds 0.5")]
    Unusable { ratio: f64 },

    #[error("interval {interval_s} s does not divide duration {duration_s} s")]
    NonDivisibleInterval { interval_s: f64, duration_s: f64 },

    #[error("degenerate (constant) channel")]
    DegenerateChannel,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid probability table: {0}")]
    InvalidProbability(String),

    #[error("coincident electrode positions: {a} and {b}")]
    CoincidentElectrodes { a: String, b: String },

    #[error("band [{lo}, {hi}) Hz contains no PSD bins")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("feature missing for trial `{trial_id}`: {reason}")]
    FeatureMissing { trial_id: String, reason: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("embedding not found for key `{key}`")]
    MissingEmbedding { key: String },

    #[error("requested {requested} components but achievable rank is {achievable}")]
    RankDeficient { requested: usize, achievable: usize },

    #[error("training set contains a single class")]
    SingleClass,

    #[error("dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("inconsistent sequence lengths: {first} vs {other}")]
    InconsistentSequenceLength { first: usize, other: usize },

    #[error("fold leakage for test subject `{subject}`: {detail}")]
    Leakage { subject: String, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed binary file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn manifest(
        trial_id: impl Into<String>,
        field: impl Into<String>,
        msg: impl Into<String>,
    ) -> Self {
        Error::Manifest {
            trial_id: trial_id.into(),
            field: field.into(),
            msg: msg.into(),
        }
    }
}
