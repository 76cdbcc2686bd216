//! Exact power-series expansion of an eta-quotient.
//!
//! Each factor `(q^m; q^m)_inf^{+-1}` is applied to the running series in place
//! using Euler's pentagonal expansion
//!
//! ```text
//! (q; q)_inf = sum_{j in Z} (-1)^j q^{j(3j-1)/2}
//! ```
//!
//! which has only `O(sqrt(N))` nonzero terms below `q^N`. Multiplying by it and
//! dividing by it (long division against a unit constant term) both cost
//! `O(N^{3/2})` big-integer additions per application; `|delta_r|` is applied
//! by repetition. Nothing is rounded.

use rug::Integer;

use crate::error::{Error, Result};
use crate::quotient::EtaQuotient;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSeries {
    upto: usize,
    coeffs: Vec<Integer>,
    source: EtaQuotient,
}

impl ExactSeries {
    pub fn upto(&self) -> usize {
        self.upto
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Integer> {
        self.coeffs
    }

    pub fn source(&self) -> &EtaQuotient {
        &self.source
    }

    /// `g(n)`, or `None` past the truncation order.
    pub fn get(&self, n: usize) -> Option<&Integer> {
        self.coeffs.get(n)
    }
}

/// Exponents and signs of `(q^m; q^m)_inf` below `q^{upto+1}`, constant term excluded.
fn pentagonal_terms(m: usize, upto: usize) -> Vec<(usize, bool)> {
    let mut terms = Vec::new();
    for j in 1usize.. {
        let lower = m * (j * (3 * j - 1) / 2);
        if lower > upto {
            break;
        }
        let negative = j % 2 == 1;
        terms.push((lower, negative));
        let upper = m * (j * (3 * j + 1) / 2);
        if upper <= upto {
            terms.push((upper, negative));
        }
    }
    terms.sort_unstable_by_key(|t| t.0);
    terms
}

/// `series *= (q^m; q^m)_inf`, truncated to the series length.
fn mul_euler(series: &mut [Integer], terms: &[(usize, bool)]) {
    for n in (0..series.len()).rev() {
        let mut acc = Integer::new();
        for &(e, negative) in terms {
            if e > n {
                break;
            }
            if negative {
                acc -= &series[n - e];
            } else {
                acc += &series[n - e];
            }
        }
        series[n] += acc;
    }
}

/// `series /= (q^m; q^m)_inf`, truncated to the series length.
fn div_euler(series: &mut [Integer], terms: &[(usize, bool)]) {
    for n in 0..series.len() {
        let mut acc = Integer::new();
        for &(e, negative) in terms {
            if e > n {
                break;
            }
            // t[n] = s[n] - sum_{e>0} sign_e t[n-e]
            if negative {
                acc += &series[n - e];
            } else {
                acc -= &series[n - e];
            }
        }
        series[n] += acc;
    }
}

/// Exact `g(0..=upto)`.
pub fn expand(eq: &EtaQuotient, upto: i64) -> Result<ExactSeries> {
    if upto < 0 {
        return Err(Error::Negative { what: "truncation order", value: upto });
    }
    let upto = upto as usize;
    let mut coeffs = vec![Integer::new(); upto + 1];
    coeffs[0] = Integer::from(1);
    for (m, d) in eq.factors() {
        let terms = pentagonal_terms(m as usize, upto);
        for _ in 0..d.unsigned_abs() {
            if d > 0 {
                mul_euler(&mut coeffs, &terms);
            } else {
                div_euler(&mut coeffs, &terms);
            }
        }
    }
    Ok(ExactSeries { upto, coeffs, source: eq.clone() })
}

/// Single coefficient `g(n)`; expands through `n`.
pub fn coefficient(eq: &EtaQuotient, n: i64) -> Result<Integer> {
    if n < 0 {
        return Err(Error::Negative { what: "coefficient index", value: n });
    }
    let mut series = expand(eq, n)?.into_coeffs();
    Ok(series.swap_remove(n as usize))
}

/// Dense truncated product of two series, `O(len^2)`.
pub fn mul_truncated(a: &[Integer], b: &[Integer], len: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += Integer::from(ai * bj);
        }
    }
    out
}
