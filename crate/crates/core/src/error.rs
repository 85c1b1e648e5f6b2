use alloc::string::String;

/// Errors raised by the sharpening core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot parse model spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("singular design: {0}")]
    Singular(String),
    #[error("iteration limit reached: {0}")]
    IterationLimit(String),
    #[error("support mismatch: {0}")]
    Support(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
