use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("need at least {needed} rows, got {found}")]
    TooFewRows { needed: usize, found: usize },
    #[error("need at least {needed} usable columns, got {found}")]
    TooFewColumns { needed: usize, found: usize },
    #[error("every column is constant")]
    AllColumnsConstant,
    #[error("sample lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("all values are equal")]
    DegenerateSpread,
    #[error("duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("no frame spans for category `{0}`")]
    UnknownCategory(String),
    #[error("number of bins must be at least 1")]
    NonPositiveBins,
    #[error("interval {index} outside 0..{count}")]
    UnknownInterval { index: usize, count: usize },
    #[error("interval requested without a timeline binning")]
    MissingBinning,
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::TooFewRows { .. } => "TooFewRows",
            EngineError::TooFewColumns { .. } => "TooFewColumns",
            EngineError::AllColumnsConstant => "AllColumnsConstant",
            EngineError::LengthMismatch(..) => "LengthMismatch",
            EngineError::TooFewValues(_) => "TooFewValues",
            EngineError::DegenerateSpread => "DegenerateSpread",
            EngineError::NonPositiveDuration(_) => "NonPositiveDuration",
            EngineError::UnknownCategory(_) => "UnknownCategory",
            EngineError::NonPositiveBins => "NonPositiveBins",
            EngineError::UnknownInterval { .. } => "UnknownInterval",
            EngineError::MissingBinning => "MissingBinning",
        }
    }
}
