use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported field order {0}: only primes and 4 are supported")]
    UnsupportedField(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("no element e with e^2 + e != 0 exists in a field of order {0}")]
    NoSuchElement(u32),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("unknown network '{0}'")]
    UnknownNetwork(String),
    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),
    #[error("unknown protocol '{0}'")]
    UnknownProtocol(String),
    #[error("unknown claim '{0}'")]
    UnknownClaim(String),
    #[error("protocol {protocol} cannot run over a field of order {q}")]
    FieldParityMismatch { protocol: String, q: u32 },
    #[error("protocol {protocol} needs {needed} randomness symbols, got {got}")]
    MissingRandomness {
        protocol: String,
        needed: usize,
        got: usize,
    },
    #[error("protocol {protocol} takes {expected} messages, got {got}")]
    MessageCount {
        protocol: String,
        expected: usize,
        got: usize,
    },
    #[error("scenario does not match the protocol's network: {0}")]
    ScenarioMismatch(String),
    #[error("invalid field element '{0}'")]
    InvalidElement(String),
    #[error("channel coefficient must be nonnegative, got {0}")]
    NegativeCoefficient(f64),
    #[error("no sign change of the secure computation rate in (0, {0}]")]
    BracketFailure(f64),
    #[error("h grid is empty")]
    EmptyGrid,
    #[error("h grid must be positive and strictly increasing")]
    InvalidGrid,
    #[error("RT must be positive, got {0}")]
    InvalidRt(f64),
    #[error("time difference does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("Monte-Carlo oracle needs at least 10000 samples, got {0}")]
    TooFewSamples(u64),
    #[error("a scheme is infeasible at h = {0}")]
    InfeasibleRegion(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
