use thiserror::Error;

/// Failure modes of the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty support")]
    EmptySupport,

    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("total mass {sum} outside [{lo}, {hi}]")]
    NotNormalized { sum: f64, lo: f64, hi: f64 },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("truncation would need more than {cap} support points")]
    TruncationOverflow { cap: usize },

    #[error("thinning parameter {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("alpha {alpha} within one finite-difference step ({step}) of the interval ends")]
    AlphaTooClose { alpha: f64, step: f64 },

    #[error("mean is zero")]
    ZeroMean,

    #[error("zero mass strictly inside the support at index {index}")]
    InteriorZero { index: usize },

    #[error("function value at index {index} is not strictly positive")]
    NonPositiveF { index: usize },

    #[error("function has {got} values, need at least {need}")]
    FunctionTooShort { got: usize, need: usize },

    #[error("likelihood-ratio order needs interval supports")]
    IncomparableSupports,

    #[error("Johnstone-MacGibbon information is infinite")]
    InfiniteInformation,

    #[error("support must contain at least two points")]
    DegenerateSupport,

    #[error("energy form is singular on the active coordinates")]
    DegenerateEnergy,

    #[error("eigen-solver did not converge (residual {residual})")]
    EigenNotConverged { residual: f64 },

    #[error("not c-log-concave with full support: {0}")]
    NotCLogConcave(String),

    #[error("support end {support_end} exceeds n = {n}")]
    SupportExceedsN { support_end: usize, n: usize },

    #[error("input {index} is not ultra-log-concave")]
    NotUlc { index: usize },

    #[error("coordinate {index} = {value} outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("entropy order q = {0} must be finite and positive")]
    BadQ(f64),

    #[error("direction coordinate {index} is negative")]
    DirectionNotIncreasing { index: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
