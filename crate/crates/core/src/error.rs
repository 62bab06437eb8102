use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("state blew up at t = {t}: {reason}")]
    Blowup { t: f64, reason: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("decay fit needs at least {needed} usable samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}
