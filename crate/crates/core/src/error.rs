use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported Cartan type {0}")]
    UnsupportedType(String),
    #[error("invalid real form: {0}")]
    InvalidRealForm(String),
    #[error("invalid grading element: {0}")]
    InvalidGradingElement(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("not negative ({reason}): value {value:e} at {witness:?}")]
    NotNegative { reason: String, value: f64, witness: Vec<f64> },
    #[error("flow escaped the chart at stage {stage} (norm {norm:e})")]
    FlowEscape { stage: usize, norm: f64 },
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("no connection found: {0}")]
    NoConnection(String),
    #[error("horizontal disc escaped: {0}")]
    DiscEscape(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("invalid ideal: {0}")]
    InvalidIdeal(String),
    #[error("unbounded entry: {0}")]
    UnboundedEntry(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
