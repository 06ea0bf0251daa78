use thiserror::Error;

/// Errors raised by the verification engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("domain tag mismatch: {left} vs {right}")]
    DomainMismatch { left: String, right: String },

    #[error("singular inversion: constant term is zero")]
    SingularInversion,

    #[error("inadmissible factor #{index} (a = {a}, multiplicity {multiplicity}) for a disk expansion")]
    InadmissibleFactor {
        index: usize,
        a: String,
        multiplicity: i32,
    },

    #[error("pole order mismatch at w0 = {at}: expected {expected}, found {found}")]
    PoleOrderMismatch {
        at: String,
        expected: i64,
        found: i64,
    },

    #[error("unsupported pole order {order} at w0 = {at}")]
    UnsupportedPoleOrder { at: String, order: i64 },

    #[error("evaluation point {0} is at or near a pole")]
    PoleProximity(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("index range error, missing entries: {}", .0.join(", "))]
    Range(Vec<String>),

    #[error("division by zero")]
    DivisionByZero,

    #[error("unsupported structure-function family k = {0}")]
    UnsupportedFamily(u32),

    #[error("parity error: {0}")]
    Parity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precision error: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;
