//! Textual quotient specs: `"m1:d1,m2:d2,..."`.

use std::fmt;
use std::str::FromStr;

use etaq_core::{Error, EtaQuotient};
use thiserror::Error;

/// A parse failure at byte offset `position` of the spec string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid quotient spec at position {position}: {message}")]
pub struct SpecError {
    pub position: usize,
    pub message: String,
}

impl SpecError {
    fn at(position: usize, message: impl Into<String>) -> Self {
        SpecError { position, message: message.into() }
    }
}

/// A parsed spec. Formatting gives the canonical form (no spaces, input order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientSpec {
    quotient: EtaQuotient,
}

impl QuotientSpec {
    pub fn quotient(&self) -> &EtaQuotient {
        &self.quotient
    }

    pub fn into_quotient(self) -> EtaQuotient {
        self.quotient
    }

    /// From the two parallel lists of `--m` / `--delta`.
    pub fn from_lists(m: &str, delta: &str) -> Result<Self, SpecError> {
        let ms = split_items(m);
        let ds = split_items(delta);
        if ms.len() != ds.len() {
            return Err(SpecError::at(0, format!("--m has {} entries but --delta has {}", ms.len(), ds.len())));
        }
        let mut mv = Vec::with_capacity(ms.len());
        let mut dv = Vec::with_capacity(ds.len());
        for ((mp, mt), (dp, dt)) in ms.iter().zip(&ds) {
            mv.push(parse_m(mt, *mp)?);
            dv.push(parse_delta(dt, *dp)?);
        }
        let offsets: Vec<usize> = ms.iter().map(|(p, _)| *p).collect();
        build(mv, dv, &offsets)
    }
}

/// Items with the byte offset where each starts.
fn split_items(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in s.split(',') {
        out.push((start, part));
        start += part.len() + 1;
    }
    out
}

fn leading_space(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

fn parse_m(text: &str, pos: usize) -> Result<u64, SpecError> {
    let at = pos + leading_space(text);
    let t = text.trim();
    if t.is_empty() {
        return Err(SpecError::at(at, "missing m"));
    }
    match t.parse::<i64>() {
        Ok(v) if v > 0 => Ok(v as u64),
        Ok(v) => Err(SpecError::at(at, format!("m must be a positive integer, got {v}"))),
        Err(_) => Err(SpecError::at(at, format!("m is not an integer: {t:?}"))),
    }
}

fn parse_delta(text: &str, pos: usize) -> Result<i64, SpecError> {
    let at = pos + leading_space(text);
    let t = text.trim();
    if t.is_empty() {
        return Err(SpecError::at(at, "missing exponent"));
    }
    match t.parse::<i64>() {
        Ok(0) => Err(SpecError::at(at, "zero exponent")),
        Ok(v) => Ok(v),
        Err(_) => Err(SpecError::at(at, format!("exponent is not an integer: {t:?}"))),
    }
}

fn build(m: Vec<u64>, delta: Vec<i64>, offsets: &[usize]) -> Result<QuotientSpec, SpecError> {
    EtaQuotient::new(m, delta).map(|quotient| QuotientSpec { quotient }).map_err(|e| match e {
        Error::DuplicateM { index, first, m } => SpecError::at(
            offsets[index],
            format!("duplicate m = {m} (first given at position {})", offsets[first]),
        ),
        Error::ZeroExponent { index } => SpecError::at(offsets[index], "zero exponent"),
        Error::NonPositiveM { index } => SpecError::at(offsets[index], "m must be a positive integer"),
        Error::EmptyQuotient => SpecError::at(0, "empty spec"),
        other => SpecError::at(0, other.to_string()),
    })
}

impl FromStr for QuotientSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        if s.trim().is_empty() {
            return Err(SpecError::at(0, "empty spec"));
        }
        let mut m = Vec::new();
        let mut delta = Vec::new();
        let mut offsets = Vec::new();
        for (pos, item) in split_items(s) {
            let Some(colon) = item.find(':') else {
                return Err(SpecError::at(pos + leading_space(item), format!("expected m:delta, got {:?}", item.trim())));
            };
            m.push(parse_m(&item[..colon], pos)?);
            delta.push(parse_delta(&item[colon + 1..], pos + colon + 1)?);
            offsets.push(pos + leading_space(item));
        }
        build(m, delta, &offsets)
    }
}

impl fmt::Display for QuotientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.quotient)
    }
}
