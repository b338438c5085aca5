use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid deformation: {0}")]
    InvalidSpec(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("closed form undefined: {0}")]
    Undefined(String),

    #[error("step size underflow at t = {t} (last accepted time {last_good_t})")]
    StepSizeUnderflow { t: f64, last_good_t: f64 },

    #[error("right-hand side returned non-finite values at t = {t}")]
    NonFiniteRhs { t: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
