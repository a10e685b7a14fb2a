use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("outcome {outcome} is outside the model alphabet of {count} outcomes")]
    UnknownOutcome { outcome: usize, count: usize },
    #[error("expected {expected} parameter(s), got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("parameter {index} = {value} lies outside [{lower}, {upper}]")]
    ParameterOutOfRange {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("parameter index {index} out of range for a model with {count} parameter(s)")]
    ParameterIndex { index: usize, count: usize },
    #[error("order must be greater than 1, got {0}")]
    InvalidOrder(f64),
    #[error("Gaussian absolute moments need an integer order >= 2, got {0}")]
    NonIntegerOrder(f64),
    #[error("negative variance {0}")]
    NegativeVariance(f64),
    #[error("bound undefined (zero information)")]
    ZeroInformation,
    #[error("measurement count must be at least 1")]
    NoMeasurements,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid prior: {0}")]
    InvalidPrior(&'static str),
    #[error("degenerate posterior: every grid weight underflowed to zero")]
    DegeneratePosterior,
    #[error("data incompatible with model: the likelihood vanishes on every grid node")]
    IncompatibleData,
    #[error("histogram has {got} bins but the model has {expected} outcomes")]
    HistogramLength { expected: usize, got: usize },
    #[error("unbounded Holevo variance (zero resultant phasor)")]
    UnboundedHolevoVariance,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
