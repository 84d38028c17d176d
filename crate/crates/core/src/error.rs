use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} is outside the sequence domain (first admissible index {first})")]
    IndexOutOfDomain { index: i64, first: i64 },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid operator expression: {0}")]
    InvalidExpression(String),

    #[error("window [{lo}, {hi}] has {size} indices, above the limit of {max}")]
    WindowTooLarge { lo: i64, hi: i64, size: usize, max: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("vector support violates the window: {0}")]
    SupportViolation(String),

    #[error("nonpositive weight {value} at index {index}")]
    NonPositiveWeight { index: i64, value: f64 },

    #[error("gap condition violated: max over n >= 0 is {upper_nonneg}, min over n < 0 is {lower_neg}")]
    GapViolated { upper_nonneg: f64, lower_neg: f64 },

    #[error("|lambda| = {modulus} lies outside the open gap ({lo}, {hi})")]
    LambdaOutsideGap { modulus: f64, lo: f64, hi: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
