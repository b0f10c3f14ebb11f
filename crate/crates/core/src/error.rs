use core::fmt;

/// Errors raised by the ring, lifting and classification routines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// The residue characteristic is 2, composite, or out of range.
    InvalidPrime(u64),
    InvalidPrecision { precision: u32, reason: &'static str },
    /// Operands belong to different rings.
    DescriptorMismatch,
    NotAUnit,
    InsufficientValuation { requested: u32 },
    NotASquare,
    NoSolution,
    TypeMismatch(&'static str),
    Degenerate,
    NotCongruent,
    NotEpsilonHermitian { row: usize, col: usize },
    /// A block could not be certified invertible or exactly zero at the
    /// working precision.
    PrecisionExhausted { precision: u32 },
    NotAUnitLength,
    NotAUnitPairing,
    NoResidueSolution,
    ResidueWitnessInvalid,
    ShapeMismatch,
    WrongInstance(&'static str),
    /// Two independent computations of the same invariant disagreed.
    Inconsistent(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidPrime(p) => write!(f, "residue characteristic {p} must be an odd prime below 2^31"),
            Error::InvalidPrecision { precision, reason } => {
                write!(f, "invalid precision {precision}: {reason}")
            }
            Error::DescriptorMismatch => f.write_str("operands belong to different rings"),
            Error::NotAUnit => f.write_str("element is not a unit"),
            Error::InsufficientValuation { requested } => {
                write!(f, "element is not divisible by y^{requested}")
            }
            Error::NotASquare => f.write_str("residue is not a square"),
            Error::NoSolution => f.write_str("equation has no solution"),
            Error::TypeMismatch(what) => write!(f, "type mismatch: {what}"),
            Error::Degenerate => f.write_str("form is degenerate"),
            Error::NotCongruent => f.write_str("forms are not congruent"),
            Error::NotEpsilonHermitian { row, col } => {
                write!(f, "matrix is not epsilon-hermitian at entry ({row},{col})")
            }
            Error::PrecisionExhausted { precision } => write!(
                f,
                "precision exhausted: cannot certify the form at precision {precision}; a precision above {precision} is required"
            ),
            Error::NotAUnitLength => f.write_str("vector does not have unit length"),
            Error::NotAUnitPairing => f.write_str("vectors do not pair to a unit"),
            Error::NoResidueSolution => f.write_str("residue equation has no solution"),
            Error::ResidueWitnessInvalid => f.write_str("residue witness does not verify"),
            Error::ShapeMismatch => f.write_str("forms differ in ring, epsilon or size"),
            Error::WrongInstance(what) => write!(f, "operation not available for this ring: {what}"),
            Error::Inconsistent(what) => write!(f, "internal consistency check failed: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
