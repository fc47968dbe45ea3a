use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("composition domain mismatch: {0}")]
    CompositionDomain(String),
    #[error("functor mismatch: {0}")]
    FunctorMismatch(String),
    #[error("algebra variant mismatch: {0}")]
    VariantMismatch(String),
    #[error("unsupported for this algebra variant: {0}")]
    UnsupportedVariant(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("zero-strength functional")]
    ZeroStrength,
    #[error("not positive semidefinite: smallest eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("unregistered region image: {0}")]
    UnregisteredRegion(String),
    #[error("step budget exceeded: {0}")]
    StepBudget(String),
    #[error("trajectory left the time interval at t = {0}")]
    LeftInterval(f64),
    #[error("non-injective object map: {0} and {1} collide")]
    NonInjective(String, String),
    #[error("invalid section: {0}")]
    InvalidSection(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
