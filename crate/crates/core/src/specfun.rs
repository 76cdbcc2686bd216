//! Modified Bessel functions `I_nu(x)` of integer and half-integer order, the
//! growth function `Xi_Delta` and the zeta values it needs.
//!
//! The double-precision kernel switches from the power series to the
//! large-argument expansion
//!
//! ```text
//! I_nu(x) ~ e^x / sqrt(2 pi x) * (1 - (4nu^2 - 1)/(8x) + (4nu^2 - 1)(4nu^2 - 9)/(2! (8x)^2) - ...)
//! ```
//!
//! at `x = 30`, truncating the divergent expansion at its smallest term.
//! Half-integer orders use the elementary closed forms when `x` is large
//! enough for the three-term recurrence to be stable.
//!
//! [`bessel_i_mp`] sums the power series in MPFR arithmetic. The asymptotic
//! evaluator needs it: the main term of `g(n)` is a sum of exponentially large
//! shells whose difference from an integer is only `O(1)`.

use std::f64::consts::PI;

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::quotient::HalfInt;

/// Order `nu = twice_nu / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BesselOrder {
    twice_nu: i64,
}

impl BesselOrder {
    pub const fn from_twice(twice_nu: i64) -> Self {
        BesselOrder { twice_nu }
    }

    pub const fn integer(nu: i64) -> Self {
        BesselOrder { twice_nu: 2 * nu }
    }

    /// `-Delta_1 - 1`, the order of the main-theorem shells.
    pub const fn main_theorem(delta1: HalfInt) -> Self {
        BesselOrder { twice_nu: -delta1.twice() - 2 }
    }

    /// `Delta_1 + 1`, the order of the convergent-series shells.
    pub const fn convergent_series(delta1: HalfInt) -> Self {
        BesselOrder { twice_nu: delta1.twice() + 2 }
    }

    pub const fn twice(self) -> i64 {
        self.twice_nu
    }

    pub fn nu(self) -> f64 {
        self.twice_nu as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice_nu % 2 == 0
    }

    /// `I_{-n} = I_n` for integer `n`; half-integer orders are kept.
    const fn canonical(self) -> Self {
        if self.is_integer() && self.twice_nu < 0 {
            BesselOrder { twice_nu: -self.twice_nu }
        } else {
            self
        }
    }
}

pub const CROSSOVER: f64 = 30.0;

/// `Gamma(twice / 2)` for `twice / 2` not a non-positive integer.
fn gamma_half(twice: i64) -> f64 {
    assert!(twice > 0 || twice % 2 != 0, "Gamma has a pole at {}", twice / 2);
    if twice % 2 == 0 {
        return (1..twice / 2).map(|i| i as f64).product();
    }
    // Gamma(1/2) = sqrt(pi), then Gamma(x + 1) = x Gamma(x) in either direction
    let mut value = PI.sqrt();
    let mut t = 1;
    while t < twice {
        value *= t as f64 / 2.0;
        t += 2;
    }
    while t > twice {
        t -= 2;
        value /= t as f64 / 2.0;
    }
    value
}

/// Power series `sum_j (x/2)^{2j+nu} / (j! Gamma(j+nu+1))`.
pub fn bessel_i_series(nu: BesselOrder, x: f64) -> f64 {
    let nu = nu.canonical();
    let half = x / 2.0;
    let v = nu.nu();
    let mut term = half.powf(v) / gamma_half(nu.twice() + 2);
    let mut sum = term;
    let q = half * half;
    for j in 1.. {
        term *= q / (j as f64 * (j as f64 + v));
        sum += term;
        if j as f64 > half && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Large-`x` expansion truncated at its smallest term.
pub fn bessel_i_asymptotic(nu: BesselOrder, x: f64) -> f64 {
    let mu = 4.0 * nu.nu() * nu.nu();
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for j in 1..200 {
        let odd = (2 * j - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * j as f64 * x);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    x.exp() / (2.0 * PI * x).sqrt() * sum
}

/// Half-integer orders from `I_{+-1/2}` by the three-term recurrence.
fn bessel_i_half_closed(nu: BesselOrder, x: f64) -> f64 {
    let c = (2.0 / (PI * x)).sqrt();
    let plus = c * x.sinh(); // I_{1/2}
    let minus = c * x.cosh(); // I_{-1/2}
    let target = nu.twice();
    if target == 1 {
        return plus;
    }
    if target == -1 {
        return minus;
    }
    if target > 0 {
        // I_{v+1} = I_{v-1} - (2v/x) I_v
        let (mut lower, mut current, mut twice) = (minus, plus, 1);
        while twice < target {
            let v = twice as f64 / 2.0;
            let next = lower - 2.0 * v / x * current;
            lower = current;
            current = next;
            twice += 2;
        }
        current
    } else {
        // I_{v-1} = I_{v+1} + (2v/x) I_v
        let (mut upper, mut current, mut twice) = (plus, minus, -1);
        while twice > target {
            let v = twice as f64 / 2.0;
            let next = upper + 2.0 * v / x * current;
            upper = current;
            current = next;
            twice -= 2;
        }
        current
    }
}

/// `I_nu(x)` in double precision for `x >= 0`.
pub fn bessel_i(nu: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("I_nu(x) needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return match nu.twice().signum() {
            0 => Ok(1.0),
            1 => Ok(0.0),
            _ => Err(Error::Domain(format!("I_nu(0) is not defined here for nu = {} < 0", nu.nu()))),
        };
    }
    let nu = nu.canonical();
    if !nu.is_integer() && (nu.twice().abs() == 1 || x >= 2.0 * nu.nu().abs().max(1.0)) {
        return Ok(bessel_i_half_closed(nu, x));
    }
    if x <= CROSSOVER {
        Ok(bessel_i_series(nu, x))
    } else {
        Ok(bessel_i_asymptotic(nu, x))
    }
}

/// `I_nu(x)` by the power series at the precision of `x`, with 32 guard bits.
///
/// For `nu >= -1/2` (and integer `nu` of either sign) every term is positive,
/// so the relative error stays near `2^{-prec}` for any `x > 0`.
pub fn bessel_i_mp(nu: BesselOrder, x: &Float) -> Float {
    let nu = nu.canonical();
    let out_prec = x.prec();
    let prec = out_prec + 32;
    let half = Float::with_val(prec, x / 2u32);
    let q = Float::with_val(prec, half.square_ref());
    let v = Float::with_val(prec, nu.twice()) / 2u32;
    let gamma = Float::with_val(prec, &v + 1u32).gamma();
    let mut term = Float::with_val(prec, (&half).pow(&v)) / gamma;
    let mut sum = term.clone();
    let half_f = half.to_f64();
    let mut j: u64 = 0;
    loop {
        j += 1;
        let denom = Float::with_val(prec, &v + j) * j;
        term *= &q;
        term /= denom;
        sum += &term;
        if j as f64 > half_f {
            let t_exp = term.get_exp().unwrap_or(i32::MIN);
            let s_exp = sum.get_exp().unwrap_or(i32::MIN);
            if term.is_zero() || (s_exp as i64 - t_exp as i64) > prec as i64 + 2 {
                break;
            }
        }
    }
    Float::with_val(out_prec, sum)
}

/// `pi` at the given precision.
pub(crate) fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Riemann zeta for real `s > 1`: direct sum to `M = 64` plus Euler-Maclaurin tail.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta(s) needs s > 1, got {s}")));
    }
    const M: f64 = 64.0;
    let head: f64 = (1..64).map(|k| (k as f64).powf(-s)).sum();
    let mut tail = M.powf(1.0 - s) / (s - 1.0) + 0.5 * M.powf(-s);
    // B_2/2!, B_4/4!, B_6/4!, B_8/8! with rising factorials of s
    let bernoulli = [1.0 / 6.0 / 2.0, -1.0 / 30.0 / 24.0, 1.0 / 42.0 / 720.0, -1.0 / 30.0 / 40320.0];
    let mut rising = s;
    let mut power = M.powf(-s - 1.0);
    for (i, b) in bernoulli.iter().enumerate() {
        tail += b * rising * power;
        let j = (2 * i + 1) as f64;
        rising *= (s + j) * (s + j + 1.0);
        power /= M * M;
    }
    Ok(head + tail)
}

/// Four-case growth function:
/// `1`, `2 x^{1/2}`, `x (log x + 1)`, `zeta(-Delta) x^{-2 Delta - 1}` for
/// `Delta = 0, -1/2, -1, <= -3/2`.
pub fn xi(delta1: HalfInt, x: f64) -> Result<f64> {
    if delta1.twice() > 0 {
        return Err(Error::Domain(format!("Xi_Delta needs Delta <= 0, got {delta1}")));
    }
    if !(x >= 1.0) {
        return Err(Error::Domain(format!("Xi_Delta(x) needs x >= 1, got {x}")));
    }
    Ok(match delta1.twice() {
        0 => 1.0,
        -1 => 2.0 * x.sqrt(),
        -2 => x * (x.ln() + 1.0),
        t => {
            let d = t as f64 / 2.0;
            zeta(-d)? * x.powf(-2.0 * d - 1.0)
        }
    })
}
