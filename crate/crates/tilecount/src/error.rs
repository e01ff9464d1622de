use std::fmt;

/// Errors shared across the crate.
///
/// Variants correspond to the stable failure modes of the library; the CLI
/// maps them onto its exit-code contract via [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two field elements over different bases were combined.
    BasisMismatch { left_dim: usize, right_dim: usize },
    /// An interval sign test ran out of refinement budget.
    SignUndecided,
    /// A tile has area <= 0.
    NonpositiveArea,
    /// The two boundary profiles and the area do not describe a polygon of
    /// positive width at every height.
    InconsistentProfile,
    /// Text input could not be parsed. `pos` is a byte offset.
    Syntax { pos: usize, msg: String },
    /// Quasi-inverse applied to a series with nonzero constant term.
    NonzeroConstInQuasiInv,
    /// A construction exceeded a configured size cap.
    SizeLimit { what: String, need: usize, cap: usize },
    /// A multisum has infinitely many contributing lattice points.
    UnboundedSupport,
    /// Enumeration produced more results than the caller allowed.
    LimitExceeded { limit: usize },
    /// The augmented cycle system admitted no affine parametrization.
    LatticeDegenerate,
    /// A prime was required.
    NotPrime(u64),
    /// The second partition does not refine the first.
    NotRefinement,
    /// The exponential base is missing a required prime factor.
    BadBase { base: u64, missing_prime: u64 },
    /// Too few data points for a fit.
    InsufficientData { have: usize, need: usize },
    /// A positive multisum term was not an integer.
    NonIntegralTerm,
    /// Cooperative cancellation was requested.
    Canceled,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code contract: 0 success, 1 verification failure, 2 parse error,
    /// 3 resource/size limit, 4 precision. Verification failure (1) is not an
    /// `Error`; the CLI produces it directly.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Syntax { .. } => 2,
            Error::SizeLimit { .. }
            | Error::UnboundedSupport
            | Error::LimitExceeded { .. }
            | Error::Canceled => 3,
            Error::SignUndecided => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BasisMismatch { left_dim, right_dim } => {
                write!(f, "BASIS_MISMATCH: elements over bases of dimension {left_dim} and {right_dim}")
            }
            Error::SignUndecided => write!(f, "SIGN_UNDECIDED: refinement budget exhausted"),
            Error::NonpositiveArea => write!(f, "NONPOSITIVE_AREA"),
            Error::InconsistentProfile => write!(f, "INCONSISTENT_PROFILE"),
            Error::Syntax { pos, msg } => write!(f, "SYNTAX_ERROR at byte {pos}: {msg}"),
            Error::NonzeroConstInQuasiInv => write!(f, "NONZERO_CONST_IN_QUASIINV"),
            Error::SizeLimit { what, need, cap } => {
                write!(f, "SIZE_LIMIT: {what} needs {need}, cap is {cap}")
            }
            Error::UnboundedSupport => write!(f, "UNBOUNDED_SUPPORT"),
            Error::LimitExceeded { limit } => write!(f, "LIMIT_EXCEEDED: more than {limit} results"),
            Error::LatticeDegenerate => write!(f, "LATTICE_DEGENERATE"),
            Error::NotPrime(p) => write!(f, "NOT_PRIME: {p}"),
            Error::NotRefinement => write!(f, "NOT_REFINEMENT"),
            Error::BadBase { base, missing_prime } => {
                write!(f, "BAD_BASE: {base} is missing required prime factor {missing_prime}")
            }
            Error::InsufficientData { have, need } => {
                write!(f, "INSUFFICIENT_DATA: have {have} values, need {need}")
            }
            Error::NonIntegralTerm => write!(f, "non-integral factorial-ratio term"),
            Error::Canceled => write!(f, "canceled"),
        }
    }
}

impl std::error::Error for Error {}
