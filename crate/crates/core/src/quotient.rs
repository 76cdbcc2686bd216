//! Eta-quotients and the residue-class invariants that drive the asymptotics.

use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use rug::ops::Pow;
use rug::Rational as BigRational;

use crate::error::{Error, Result};
use crate::Rational;

/// An exact half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(value: i64) -> Self {
        HalfInt(2 * value)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `G(q) = prod_r (q^{m_r}; q^{m_r})_inf^{delta_r}` with distinct `m_r >= 1`
/// and nonzero `delta_r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EtaQuotient {
    m: Vec<u64>,
    delta: Vec<i64>,
}

impl EtaQuotient {
    pub fn new(m: Vec<u64>, delta: Vec<i64>) -> Result<Self> {
        if m.len() != delta.len() {
            return Err(Error::LengthMismatch { m: m.len(), delta: delta.len() });
        }
        if m.is_empty() {
            return Err(Error::EmptyQuotient);
        }
        for (index, &mr) in m.iter().enumerate() {
            if mr == 0 {
                return Err(Error::NonPositiveM { index });
            }
            if let Some(first) = m[..index].iter().position(|&x| x == mr) {
                return Err(Error::DuplicateM { index, first, m: mr });
            }
        }
        if let Some(index) = delta.iter().position(|&d| d == 0) {
            return Err(Error::ZeroExponent { index });
        }
        Ok(EtaQuotient { m, delta })
    }

    /// `1 / (q;q)_inf`, the partition generating function.
    pub fn partitions() -> Self {
        EtaQuotient { m: vec![1], delta: vec![-1] }
    }

    pub fn m(&self) -> &[u64] {
        &self.m
    }

    pub fn delta(&self) -> &[i64] {
        &self.delta
    }

    pub fn factors(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.m.iter().copied().zip(self.delta.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// `Delta_1 = -(1/2) sum delta_r`.
    pub fn delta1(&self) -> HalfInt {
        HalfInt::from_twice(-self.delta.iter().sum::<i64>())
    }

    /// `Delta_2 = sum m_r delta_r`.
    pub fn delta2(&self) -> i64 {
        self.factors().map(|(m, d)| m as i64 * d).sum()
    }

    /// `L = lcm(m_r)`.
    pub fn big_l(&self) -> u64 {
        self.m.iter().fold(1u64, |acc, &m| acc.lcm(&m))
    }

    /// Canonical residue of `k` modulo `L`, taken in `1..=L`.
    pub fn residue(&self, k: u64) -> u64 {
        let l = self.big_l();
        match k % l {
            0 => l,
            r => r,
        }
    }

    /// `Delta_3(k) = -sum delta_r gcd(m_r, k)^2 / m_r`, evaluated directly for any `k >= 1`.
    pub fn delta3(&self, k: u64) -> Rational {
        self.factors().fold(Rational::zero(), |acc, (m, d)| {
            let g = m.gcd(&k) as i64;
            acc - Rational::new(d * g * g, m as i64)
        })
    }

    /// `Delta_4(k)^2 = prod (m_r / gcd(m_r, k))^{-delta_r}`, evaluated directly.
    pub fn delta4_sq(&self, k: u64) -> BigRational {
        let mut acc = BigRational::from(1);
        for (m, d) in self.factors() {
            let base = BigRational::from(m / m.gcd(&k));
            let power = base.pow(d.unsigned_abs() as u32);
            if d > 0 {
                acc /= power;
            } else {
                acc *= power;
            }
        }
        acc
    }
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (m, d)) in self.factors().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}:{d}")?;
        }
        Ok(())
    }
}

/// Everything the asymptotic formulas need to know about a quotient, with
/// per-residue tables indexed by `l in 1..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientInvariants {
    pub delta1: HalfInt,
    pub delta2: i64,
    pub big_l: u64,
    delta3: Vec<Rational>,
    delta4_sq: Vec<BigRational>,
    pub l_pos: Vec<u64>,
    pub l_nonpos: Vec<u64>,
}

impl QuotientInvariants {
    fn index(&self, k: u64) -> usize {
        assert!(k >= 1, "residues start at 1");
        let r = (k - 1) % self.big_l;
        r as usize
    }

    /// `Delta_3` of the class of `k` (any `k >= 1`).
    pub fn delta3(&self, k: u64) -> Rational {
        self.delta3[self.index(k)]
    }

    pub fn delta4_sq(&self, k: u64) -> &BigRational {
        &self.delta4_sq[self.index(k)]
    }

    /// Positive square root of [`Self::delta4_sq`] in double precision.
    pub fn delta4(&self, k: u64) -> f64 {
        self.delta4_sq(k).to_f64().sqrt()
    }

    pub fn is_positive_class(&self, k: u64) -> bool {
        self.delta3(k) > Rational::zero()
    }

    pub fn residues(&self) -> impl Iterator<Item = u64> {
        1..=self.big_l
    }
}

pub fn invariants(eq: &EtaQuotient) -> QuotientInvariants {
    let big_l = eq.big_l();
    let delta3: Vec<Rational> = (1..=big_l).map(|l| eq.delta3(l)).collect();
    let delta4_sq = (1..=big_l).map(|l| eq.delta4_sq(l)).collect();
    let (l_pos, l_nonpos) = split_by_sign(&delta3);
    QuotientInvariants {
        delta1: eq.delta1(),
        delta2: eq.delta2(),
        big_l,
        delta3,
        delta4_sq,
        l_pos,
        l_nonpos,
    }
}

fn split_by_sign(delta3: &[Rational]) -> (Vec<u64>, Vec<u64>) {
    (1..=delta3.len() as u64).partition(|&l| delta3[l as usize - 1].is_positive())
}

/// `(L_{>0}, L_{<=0})`.
pub fn classify(eq: &EtaQuotient) -> (Vec<u64>, Vec<u64>) {
    let delta3: Vec<Rational> = (1..=eq.big_l()).map(|l| eq.delta3(l)).collect();
    split_by_sign(&delta3)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub ok: bool,
    /// `(l, r)`: residue where the inequality fails and the (first) minimizing factor index.
    pub violations: Vec<(u64, usize)>,
}

/// Checks `min_r gcd(m_r, l)^2 / m_r >= Delta_3(l) / 24` for every `l in 1..=L`.
pub fn check_admissible(eq: &EtaQuotient) -> AdmissibilityReport {
    let mut violations = Vec::new();
    for l in 1..=eq.big_l() {
        let threshold = eq.delta3(l) / 24;
        let (index, smallest) = eq
            .m()
            .iter()
            .enumerate()
            .map(|(r, &m)| {
                let g = m.gcd(&l) as i64;
                (r, Rational::new(g * g, m as i64))
            })
            .fold(None, |best: Option<(usize, Rational)>, (r, v)| match best {
                Some((_, b)) if b <= v => best,
                _ => Some((r, v)),
            })
            .expect("quotient has at least one factor");
        if smallest < threshold {
            violations.push((l, index));
        }
    }
    AdmissibilityReport { ok: violations.is_empty(), violations }
}
