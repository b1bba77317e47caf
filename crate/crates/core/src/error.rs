use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("modulus exponent must be at least 1")]
    ZeroExponent,

    #[error("modulus {p}^{k} does not fit below 2^62")]
    ModulusTooLarge { p: u64, k: u32 },

    #[error("polynomial is not monic with degree >= 1")]
    NotMonic,

    #[error("polynomial degree {0} exceeds the supported maximum of {max}", max = crate::ring::MAX_DEGREE)]
    DegreeTooLarge(usize),

    #[error("polynomial {poly} is reducible modulo {p}")]
    Reducible { poly: String, p: u64 },

    #[error("polynomials {first} and {second} coincide modulo {p}")]
    DuplicateResidue { first: String, second: String, p: u64 },

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("element is not a unit (valuation {valuation})")]
    NotUnit { valuation: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for {len} blocks")]
    BlockIndex { index: usize, len: usize },

    #[error("block matrix is not invertible")]
    SingularBlock,

    #[error("cannot reduce from exponent {from} to larger exponent {to}")]
    Precision { from: u32, to: u32 },

    #[error("cokernel exponent reaches the modulus exponent {k}: {exponents:?}")]
    PrecisionSaturated { exponents: Vec<u32>, k: u32 },

    #[error("polynomial {index}: residue rank of cok(P(Xbar)) is {found}, target needs {expected}")]
    RankHypothesis {
        index: usize,
        expected: u32,
        found: u32,
    },

    #[error("work of {needed} matrices exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
