use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("an eta-quotient needs at least one factor")]
    EmptyQuotient,
    #[error("m has {m} entries but delta has {delta}")]
    LengthMismatch { m: usize, delta: usize },
    #[error("factor {index}: m must be a positive integer")]
    NonPositiveM { index: usize },
    #[error("factor {index}: m = {m} already appears at factor {first}")]
    DuplicateM { index: usize, first: usize, m: u64 },
    #[error("factor {index}: exponent delta must be nonzero")]
    ZeroExponent { index: usize },
    #[error("{what} must be non-negative, got {value}")]
    Negative { what: &'static str, value: i64 },
    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(i64),
    #[error("gcd({h}, {k}) = {gcd}, expected coprime arguments")]
    NotCoprime { h: i64, k: i64, gcd: i64 },
    #[error("h = {h} is outside 0 <= h < {k}")]
    ResidueOutOfRange { h: i64, k: i64 },
    #[error("{0}")]
    Domain(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(Hypothesis),
    #[error("assembled main term is not real: |Im| / |Re| = {ratio:e}")]
    NotReal { ratio: f64 },
}

/// The precondition of an asymptotic formula that failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// `Delta_1 <= 0` expected (main theorem) but the quotient has `Delta_1 > 0`, or vice versa.
    Delta1Sign { twice_delta1: i64, expected_positive: bool },
    /// `min_r gcd(m_r, l)^2 / m_r >= Delta_3(l) / 24` fails at residue `l`, first failing factor `r`.
    Inadmissible { residue: u64, index: usize },
    /// `24 n + Delta_2 > 0` fails.
    IndexTooSmall { n: i64, delta2: i64 },
    /// `k0` does not lie in a residue class with `Delta_3 > 0`.
    NotPositiveClass { k0: u64, residue: u64 },
    /// Sussman truncation needs `k_max >= 1`.
    EmptyTruncation,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Delta1Sign { twice_delta1, expected_positive: true } => {
                write!(f, "Delta_1 = {}/2 must be positive for the convergent series", twice_delta1)
            }
            Hypothesis::Delta1Sign { twice_delta1, expected_positive: false } => {
                write!(f, "Delta_1 = {}/2 must be <= 0 for the main theorem", twice_delta1)
            }
            Hypothesis::Inadmissible { residue, index } => write!(
                f,
                "inadmissible residue l = {residue}: gcd(m_r, l)^2 / m_r < Delta_3(l) / 24 for factor r = {index}"
            ),
            Hypothesis::IndexTooSmall { n, delta2 } => {
                write!(f, "n = {n} needs 24 n + Delta_2 > 0 (Delta_2 = {delta2})")
            }
            Hypothesis::NotPositiveClass { k0, residue } => {
                write!(f, "k0 = {k0} lies in residue class {residue} where Delta_3 <= 0")
            }
            Hypothesis::EmptyTruncation => write!(f, "k_max must be at least 1"),
        }
    }
}
