use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty word has no canonical matrix")]
    EmptyWord,
    #[error("digit {digit} outside alphabet [1, {}", bound_text(.bound))]
    DigitOutOfRange { digit: u64, bound: u64 },
    #[error("not hyperbolic: |trace| = {0} <= 2")]
    NotHyperbolic(i128),
    #[error("determinant is {0}, expected +1")]
    DeterminantNotOne(i128),
    #[error("fixed point at infinity (c = 0)")]
    FixedPointAtInfinity,
    #[error("unnormalized surd ({p}+sqrt({d}))/{q}")]
    UnnormalizedSurd { p: i128, q: i128, d: i128 },
    #[error("discriminant {0} is a perfect square or not positive")]
    SquareDiscriminant(i128),
    #[error("form [{0},{1},{2}] is not reduced")]
    NotReduced(i128, i128, i128),
    #[error("{0} is not square-free")]
    NotSquareFree(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("degenerate Kloosterman sum")]
    DegenerateKloosterman,
    #[error("{what} exceeds cap {cap}")]
    CapExceeded { what: &'static str, cap: u64 },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn bound_text(bound: &u64) -> String {
    if *bound == u64::MAX { "inf)".into() } else { format!("{bound}]") }
}
