use thiserror::Error;

/// Errors raised by the arithmetic, analytic and verification layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("{0} is not negative, the field would not be imaginary quadratic")]
    NotImaginary(i64),
    #[error("the zero ideal has no inverse and no class")]
    ZeroIdeal,
    #[error("ideal is not coprime to the modulus")]
    NotCoprime,
    #[error("modulus does not divide the group modulus")]
    NotDivisor,
    #[error("search exhausted below norm cap {0}")]
    SearchExhausted(i64),
    #[error("no character satisfies the requested predicates: {0}")]
    NoneFound(String),
    #[error("every class group character is trivial on the requested subgroup")]
    NoTwistExists,
    #[error("the subgroup is trivial, so no character can be nontrivial on it")]
    AlreadyImpossible,
    #[error("point lies on the period lattice")]
    LatticePoint,
    #[error("precision exhausted after {0} escalations")]
    PrecisionExhausted(u32),
    #[error("Weber difference vanishes numerically")]
    DegenerateDifference,
    #[error("comparison indeterminate inside the hysteresis band")]
    Indeterminate,
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
