use thiserror::Error;

/// Every failure the library can report.
///
/// Variants map one-to-one onto the error kinds named by the operations; the
/// CLI turns them into exit codes through [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid model ring parameters: {0}")]
    InvalidParams(String),
    #[error("operands belong to different model rings")]
    ParamsMismatch,
    #[error("division by an element indistinguishable from zero")]
    DivideByIndistinguishableZero,
    #[error("divisor has larger valuation than dividend ({divisor} > {dividend} in u-units)")]
    NotDivisible { dividend: u32, divisor: u32 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("bad shorthand {input:?}: {reason}")]
    Shorthand { input: String, reason: String },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("height {height} is not divisible by {d}")]
    NonDivisibleHeight { height: String, d: u32 },
    #[error("slope {0} lies outside [0, 1]")]
    SlopeOutOfRange(String),
    #[error("point set is missing {0}")]
    MissingEndpoint(String),
    #[error("rescaled polygon has non-integral break points")]
    NonIntegralBreaks,

    #[error("matrix {rows}x{cols} is too large for the minor oracle (limit 5x5)")]
    TooLarge { rows: usize, cols: usize },
    #[error("matrix is not nilpotent of order {0}")]
    NotNilpotentAtE(usize),
    #[error("Newton slopes did not converge up to m = {0}")]
    NoConvergence(u64),
    #[error("eigenvalues {0} and {1} coincide at working precision")]
    EigenvalueCollision(usize, usize),
    #[error("matrix dimension mismatch: {0}")]
    Dimension(String),

    #[error("not realizable: {0}")]
    NotRealizable(String),
    #[error("r_tau entry {value} exceeds n = {n}")]
    RTauOutOfRange { value: usize, n: usize },
    #[error("hn tower is empty")]
    EmptyTower,
    #[error("internal cross-check failed: {0}")]
    InternalMismatch(String),
    #[error("invalid datum: {0}")]
    Validation(String),
    #[error("missing input: {0}")]
    Missing(String),

    #[error("parameter value {0} lies outside the family domain")]
    OutOfDomain(String),
    #[error("polygon endpoint {got} does not match dim H/d = {expected}")]
    EndpointMismatch { got: String, expected: String },

    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn precision(msg: impl Into<String>) -> Self {
        Error::PrecisionExhausted(msg.into())
    }

    /// Exit code contract of the command line tool: 2 input error,
    /// 3 precision exhausted, 4 not realizable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) | Error::DivideByIndistinguishableZero => 3,
            Error::NotRealizable(_)
            | Error::NotNilpotentAtE(_)
            | Error::RTauOutOfRange { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
