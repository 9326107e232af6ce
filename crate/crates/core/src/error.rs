use thiserror::Error;

/// Errors raised by the momentpde engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("table has {got} values but the cap requires {needed}")]
    TableTooShort { needed: usize, got: usize },

    #[error("index {index} is beyond the sequence cap {cap}")]
    IndexBeyondCap { index: usize, cap: usize },

    #[error("value overflows f64 ({context})")]
    Overflow { context: String },

    #[error("truncation exhausted on axis {axis}: cap {cap} cannot absorb {requested} derivative(s)")]
    TruncationExhausted {
        axis: usize,
        cap: usize,
        requested: usize,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("condition (a) violated by term (j={j}, alpha={alpha:?}): ord_t={ord_t} < {required}")]
    ConditionA {
        j: usize,
        alpha: Vec<usize>,
        ord_t: usize,
        required: usize,
    },

    #[error("invalid operator term: {0}")]
    InvalidTerm(String),

    #[error("solver stopped at order n={n}: {source}")]
    SolverStopped { n: usize, source: Box<Error> },

    #[error("the constant-coefficient path requires {0}")]
    NotConstantProblem(String),

    #[error("degenerate regression design: {0}")]
    DegenerateFit(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("problem file: {0}")]
    Schema(String),

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_order(self, n: usize) -> Error {
        match self {
            Error::SolverStopped { .. } => self,
            other => Error::SolverStopped {
                n,
                source: Box::new(other),
            },
        }
    }
}
