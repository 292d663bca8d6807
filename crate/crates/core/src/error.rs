use alloc::string::String;

/// Errors raised by the polynomial machinery and the interpolators.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("variable count mismatch: {left} vs {right}")]
    NvarsMismatch { left: usize, right: usize },
    #[error("invalid ring modulus {0}: must be at least 2")]
    InvalidRingModulus(u64),
    #[error("invalid ring specification `{0}`")]
    InvalidRingSpec(String),
    #[error("probe modulus must be positive")]
    ZeroModulus,
    #[error("degree bound must be at least 2, got {0}")]
    DegreeBoundTooSmall(String),
    #[error("degree bound {0} makes probe degrees overflow 64 bits")]
    DegreeBoundTooLarge(u64),
    #[error("residue {residue} out of range for modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },
    #[error("moduli product is smaller than the reconstruction bound")]
    InsufficientModuli,
    #[error("{value} does not fit in {digits} base-{base} digits")]
    DigitOverflow {
        value: String,
        base: u64,
        digits: usize,
    },
    #[error("substitution index {k} out of range 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("invalid polynomial: {0}")]
    InvalidPoly(String),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("expansion exceeds {limit} terms")]
    ExpansionTooLarge { limit: usize },
    #[error(
        "no term accepted while {remaining} image terms remain (term bound {term_bound}); \
         the term or degree bound is too small"
    )]
    NonTermination { remaining: usize, term_bound: usize },
}
