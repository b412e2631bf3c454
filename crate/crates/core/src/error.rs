use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
///
/// IO-level failures (missing files, malformed lines) are reported by the
/// companion crate; everything here is a contract violation of the inputs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("missing embedding for id {0:?}")]
    MissingEmbedding(String),
    #[error("missing template parameter {0}")]
    MissingParameter(&'static str),
    #[error("positive document {0:?} not present in scores")]
    PositiveMissing(String),
    #[error("no eligible negatives for positive {0:?}")]
    EmptyEligible(String),
    #[error("non-finite similarity at row {row}, column {col}")]
    NonFiniteSimilarity { row: usize, col: usize },
    #[error("score {value} for {id:?} outside [0, 1]")]
    ScoreOutOfRange { id: String, value: f64 },
    #[error("empty text after tokenization")]
    EmptyText,
    #[error("training diverged at batch {batch}")]
    DivergenceDetected { batch: usize },
    #[error("target vocabulary {target} smaller than {specials} special tokens")]
    TargetTooSmall { target: usize, specials: usize },
    #[error("special token {0:?} not in vocabulary")]
    UnknownSpecial(String),
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("label {0:?} missing from training data")]
    LabelMissingInTrain(String),
    #[error("degenerate gold scores: {0}")]
    DegenerateGold(String),
    #[error("empty report")]
    EmptyReport,
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid { what, reason: reason.into() }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput(_) => "EmptyInput",
            Error::Invalid { .. } => "Invalid",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DanglingReference(_) => "DanglingReference",
            Error::MissingEmbedding(_) => "MissingEmbedding",
            Error::MissingParameter(_) => "MissingParameter",
            Error::PositiveMissing(_) => "PositiveMissing",
            Error::EmptyEligible(_) => "EmptyEligible",
            Error::NonFiniteSimilarity { .. } => "NonFiniteSimilarity",
            Error::ScoreOutOfRange { .. } => "ScoreOutOfRange",
            Error::EmptyText => "EmptyText",
            Error::DivergenceDetected { .. } => "DivergenceDetected",
            Error::TargetTooSmall { .. } => "TargetTooSmall",
            Error::UnknownSpecial(_) => "UnknownSpecial",
            Error::InvalidCounts(_) => "InvalidCounts",
            Error::DegenerateLabels(_) => "DegenerateLabels",
            Error::LabelMissingInTrain(_) => "LabelMissingInTrain",
            Error::DegenerateGold(_) => "DegenerateGold",
            Error::EmptyReport => "EmptyReport",
        }
    }
}
