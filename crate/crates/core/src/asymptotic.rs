//! Circle-method main term, its explicit error bound, the convergent series
//! for `Delta_1 > 0` and the tail diagnostic.
//!
//! One shell is the contribution of a single denominator `k` in class
//! `l = k mod L` with `Delta_3(l) > 0`:
//!
//! ```text
//! 2 pi Delta_4(l) ((24n + Delta_2) / Delta_3(l))^{-(Delta_1+1)/2}
//!     * I_nu(pi sqrt(Delta_3(l) (24n + Delta_2)) / (6k)) / k
//!     * sum_{0<=h<k, (h,k)=1} omega_{h,k} e(-nh/k)
//! ```
//!
//! Shells grow like `exp(c sqrt(n) / k)` while `g(n)` differs from their sum by
//! `O(n^{1/2} log n)` at most, so each shell is evaluated in MPFR at a
//! precision sized to its magnitude. Shells are computed in parallel and
//! summed in ascending `k`, which keeps results bit-reproducible.

use std::f64::consts::PI;

use num_integer::Integer as _;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::arith::{omega_unchecked, reduce_mod2};
use crate::Rational;
use crate::error::{Error, Hypothesis, Result};
use crate::quotient::{check_admissible, invariants, EtaQuotient, QuotientInvariants};
use crate::specfun::{bessel_i, bessel_i_mp, pi, xi, BesselOrder};

const GUARD_BITS: u32 = 32;
const BASE_BITS: u32 = 64;
/// Tolerance on `|Im| / scale` before the imaginary part is discarded.
pub const REALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    MainTheorem,
    Sussman,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::MainTheorem => "main",
            Branch::Sussman => "sussman",
        }
    }
}

/// One `(l, k)` shell.
#[derive(Debug, Clone, PartialEq)]
pub struct Contribution {
    pub residue: u64,
    pub k: u64,
    pub bessel_arg: f64,
    pub value: Float,
}

impl Contribution {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticEstimate {
    pub n: i64,
    pub branch: Branch,
    pub trunc_n: u64,
    pub contributions: Vec<Contribution>,
    pub main_total: Float,
    /// `|Im(sum)|` over the sum of shell magnitudes.
    pub imag_ratio: f64,
    /// Rigorous bound on `|g(n) - main_total|`, main-theorem branch only.
    pub error_bound: Option<f64>,
    /// Magnitude of the last nonzero shell, convergent-series branch only.
    pub remainder_indicator: Option<f64>,
    pub exact: Option<Integer>,
}

impl AsymptoticEstimate {
    pub fn main_total_f64(&self) -> f64 {
        self.main_total.to_f64()
    }

    /// Nearest integer to the main total.
    pub fn rounded(&self) -> Integer {
        self.main_total.to_integer().unwrap_or_default()
    }

    pub fn with_exact(mut self, g: Integer) -> Self {
        self.exact = Some(g);
        self
    }

    /// `g(n) - main_total`, when the exact coefficient is attached.
    pub fn deviation(&self) -> Option<Float> {
        let g = self.exact.as_ref()?;
        let prec = self.main_total.prec().max(64);
        Some(Float::with_val(prec, g) - &self.main_total)
    }

    /// `|g(n) - main_total| <= error_bound`, when both are available.
    pub fn within_bound(&self) -> Option<bool> {
        let bound = self.error_bound?;
        let dev = self.deviation()?;
        Some(dev.abs() <= bound)
    }

    /// The shell with the largest Bessel argument (first on ties).
    pub fn leading(&self) -> Option<&Contribution> {
        self.contributions
            .iter()
            .fold(None, |best: Option<&Contribution>, c| match best {
                Some(b) if b.bessel_arg >= c.bessel_arg => Some(b),
                _ => Some(c),
            })
    }
}

/// Relative spread of the diagnostic tail against its dominating exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailDiagnostic {
    pub residue: u64,
    pub k0: u64,
    pub tail: f64,
    pub scale: f64,
}

impl TailDiagnostic {
    pub fn ratio(&self) -> f64 {
        self.tail / self.scale
    }
}

/// `floor(sqrt(2 pi (n + Delta_2 / 24)))`, exact. Errors when `24n + Delta_2 <= 0`.
pub fn trunc_n(n: i64, delta2: i64) -> Result<u64> {
    let m24 = 24 * n + delta2;
    if m24 <= 0 {
        return Err(Error::Hypothesis(Hypothesis::IndexTooSmall { n, delta2 }));
    }
    // x = 2 pi m24 / 24 = pi m24 / 12
    let prec = 128;
    let x = pi(prec) * Float::with_val(prec, m24) / 12u32;
    let mut floor = Float::with_val(prec, x.sqrt_ref()).floor().to_integer().unwrap();
    // pi is irrational, so x is never a perfect square; the guard only
    // corrects a root that rounded across an integer.
    while Float::with_val(prec, floor.clone().square()) > x {
        floor -= 1;
    }
    while Float::with_val(prec, Integer::from(&floor + 1).square()) <= x {
        floor += 1;
    }
    Ok(floor.to_u64().expect("truncation fits in u64"))
}

/// The `N` used by the main theorem: the floor formula, at least one.
fn effective_trunc(n: i64, delta2: i64) -> Result<u64> {
    Ok(trunc_n(n, delta2)?.max(1))
}

fn check_main(eq: &EtaQuotient, n: i64) -> Result<QuotientInvariants> {
    let d1 = eq.delta1();
    if d1.twice() > 0 {
        return Err(Error::Hypothesis(Hypothesis::Delta1Sign { twice_delta1: d1.twice(), expected_positive: false }));
    }
    check_common(eq, n)
}

fn check_common(eq: &EtaQuotient, n: i64) -> Result<QuotientInvariants> {
    let report = check_admissible(eq);
    if let Some(&(residue, index)) = report.violations.first() {
        return Err(Error::Hypothesis(Hypothesis::Inadmissible { residue, index }));
    }
    if n < 1 || 24 * n + eq.delta2() <= 0 {
        return Err(Error::Hypothesis(Hypothesis::IndexTooSmall { n, delta2: eq.delta2() }));
    }
    Ok(invariants(eq))
}

struct Shell {
    contribution: Contribution,
    imag: f64,
    magnitude: f64,
}

/// Per-class data shared by every shell of that class.
#[derive(Debug, Clone)]
struct ClassData {
    d3_num: i64,
    d3_den: i64,
    d3: f64,
    d4: f64,
    d4_sq: rug::Rational,
}

fn class_data(inv: &QuotientInvariants, residue: u64) -> ClassData {
    let d3 = inv.delta3(residue);
    ClassData {
        d3_num: *d3.numer(),
        d3_den: *d3.denom(),
        d3: d3.to_f64().unwrap(),
        d4: inv.delta4(residue),
        d4_sq: inv.delta4_sq(residue).clone(),
    }
}

/// Below this many bits of magnitude a shell is evaluated in double precision.
const FAST_PATH_BITS: f64 = 16.0;

/// Evaluates main terms and convergent-series sums for one quotient, caching
/// the multiplier phases `theta_{h,k}` (which do not depend on `n`) across calls.
#[derive(Debug, Clone)]
pub struct Evaluator {
    eq: EtaQuotient,
    inv: QuotientInvariants,
    inadmissible: Option<(u64, usize)>,
    classes: Vec<(u64, ClassData)>,
    /// `thetas[k]`: `(h, theta_{h,k})` for `0 <= h < k` coprime; empty unless `k` is in a positive class.
    thetas: Vec<Vec<(i64, Rational)>>,
}

impl Evaluator {
    pub fn new(eq: &EtaQuotient) -> Self {
        let inv = invariants(eq);
        let classes = inv.l_pos.iter().map(|&l| (l, class_data(&inv, l))).collect();
        Evaluator {
            eq: eq.clone(),
            inadmissible: check_admissible(eq).violations.first().copied(),
            inv,
            classes,
            thetas: vec![Vec::new()],
        }
    }

    pub fn quotient(&self) -> &EtaQuotient {
        &self.eq
    }

    pub fn invariants(&self) -> &QuotientInvariants {
        &self.inv
    }

    fn extend(&mut self, k_max: u64) {
        let from = self.thetas.len() as u64;
        if k_max < from {
            return;
        }
        let eq = &self.eq;
        let inv = &self.inv;
        let fresh: Vec<Vec<(i64, Rational)>> = (from..=k_max)
            .into_par_iter()
            .map(|k| {
                if !inv.is_positive_class(k) {
                    return Vec::new();
                }
                let k = k as i64;
                (0..k)
                    .filter(|h| h.gcd(&k) == 1)
                    .map(|h| (h, omega_unchecked(eq, h, k).theta()))
                    .collect()
            })
            .collect();
        self.thetas.extend(fresh);
    }

    fn check_common(&self, n: i64) -> Result<()> {
        if let Some((residue, index)) = self.inadmissible {
            return Err(Error::Hypothesis(Hypothesis::Inadmissible { residue, index }));
        }
        if n < 1 || 24 * n + self.eq.delta2() <= 0 {
            return Err(Error::Hypothesis(Hypothesis::IndexTooSmall { n, delta2: self.eq.delta2() }));
        }
        Ok(())
    }

    fn check_main(&self, n: i64) -> Result<()> {
        let twice = self.eq.delta1().twice();
        if twice > 0 {
            return Err(Error::Hypothesis(Hypothesis::Delta1Sign { twice_delta1: twice, expected_positive: false }));
        }
        self.check_common(n)
    }

    fn check_sussman(&self, n: i64, k_max: i64) -> Result<()> {
        let twice = self.eq.delta1().twice();
        if twice <= 0 {
            return Err(Error::Hypothesis(Hypothesis::Delta1Sign { twice_delta1: twice, expected_positive: true }));
        }
        self.check_common(n)?;
        if k_max < 1 {
            return Err(Error::Hypothesis(Hypothesis::EmptyTruncation));
        }
        Ok(())
    }

    fn shell(&self, order: BesselOrder, n: i64, k: u64) -> Shell {
        let eq = &self.eq;
        let residue = eq.residue(k);
        let class = &self.classes.iter().find(|(l, _)| *l == residue).expect("positive class").1;
        let m24 = 24 * n + eq.delta2();
        let twice_d1 = eq.delta1().twice();
        let x_f64 = PI * (class.d3 * m24 as f64).sqrt() / (6.0 * k as f64);
        // (m24 / d3)^{-(Delta_1 + 1)/2}
        let power = -(twice_d1 + 2) as f64 / 4.0;
        let pref_f64 = 2.0 * PI * class.d4 * (m24 as f64 / class.d3).powf(power);

        let ki = k as i64;
        let n_mod = n.rem_euclid(ki);
        let phases: Vec<Rational> = self.thetas[k as usize]
            .iter()
            .map(|&(h, theta)| reduce_mod2(theta + Rational::new(2 * ((n_mod * h) % ki), ki)))
            .collect();
        let count = phases.len() as f64;
        let mut im = 0.0f64;
        for r in &phases {
            // e^{-pi i r}
            im -= (PI * r.to_f64().unwrap()).sin();
        }

        let log2_mag = pref_f64.log2() + x_f64 * std::f64::consts::LOG2_E - (k as f64).log2() + count.log2();
        let (value, scale) = if log2_mag < FAST_PATH_BITS {
            let re: f64 = phases.iter().map(|r| (PI * r.to_f64().unwrap()).cos()).sum();
            let scale = pref_f64 * bessel_i(order, x_f64).expect("positive argument") / k as f64;
            (Float::with_val(BASE_BITS, scale * re), scale)
        } else {
            let prec = BASE_BITS + GUARD_BITS + log2_mag.ceil() as u32;
            let pi_p = pi(prec);
            let d3 = Float::with_val(prec, class.d3_num) / class.d3_den;
            let x = Float::with_val(prec, &d3 * m24).sqrt() * &pi_p / (6 * k);
            let d4 = Float::with_val(prec, &class.d4_sq).sqrt();
            let ratio = Float::with_val(prec, m24) / &d3;
            let exponent = Float::with_val(prec, -(twice_d1 + 2)) / 4u32;
            let pref = Float::with_val(prec, &pi_p * 2u32) * d4 * ratio.pow(&exponent);
            let bessel = bessel_i_mp(order, &x);
            let mut re = Float::with_val(prec, 0);
            for r in &phases {
                let angle = Float::with_val(prec, &pi_p * *r.numer()) / *r.denom();
                re += angle.cos();
            }
            let scale = Float::with_val(prec, &pref * &bessel) / k;
            let scale_f64 = scale.to_f64();
            (scale * re, scale_f64)
        };
        Shell {
            contribution: Contribution { residue, k, bessel_arg: x_f64, value },
            imag: scale * im,
            magnitude: scale * count,
        }
    }

    fn assemble(&mut self, order: BesselOrder, n: i64, k_max: u64) -> Result<Assembled> {
        self.extend(k_max);
        let ks: Vec<u64> = (1..=k_max).filter(|&k| self.inv.is_positive_class(k)).collect();
        let this = &*self;
        let shells: Vec<Shell> = ks.par_iter().map(|&k| this.shell(order, n, k)).collect();

        let prec = shells.iter().map(|s| s.contribution.value.prec()).max().unwrap_or(BASE_BITS) + 8;
        let mut total = Float::with_val(prec, 0);
        let mut imag = 0.0;
        let mut scale = 0.0;
        for s in &shells {
            total += &s.contribution.value;
            imag += s.imag;
            scale += s.magnitude;
        }
        let imag_ratio = if scale > 0.0 { imag.abs() / scale } else { 0.0 };
        if !(imag_ratio < REALITY_TOL) {
            return Err(Error::NotReal { ratio: imag_ratio });
        }
        Ok(Assembled { contributions: shells.into_iter().map(|s| s.contribution).collect(), total, imag_ratio })
    }

    /// Main term for `Delta_1 <= 0`, truncated at `N = floor(sqrt(2 pi (n + Delta_2/24)))`.
    pub fn main_term(&mut self, n: i64) -> Result<AsymptoticEstimate> {
        self.check_main(n)?;
        let big_n = effective_trunc(n, self.eq.delta2())?;
        let order = BesselOrder::main_theorem(self.eq.delta1());
        let assembled = self.assemble(order, n, big_n)?;
        let bound = bound_from(&self.eq, &self.inv, n, big_n)?;
        Ok(AsymptoticEstimate {
            n,
            branch: Branch::MainTheorem,
            trunc_n: big_n,
            contributions: assembled.contributions,
            main_total: assembled.total,
            imag_ratio: assembled.imag_ratio,
            error_bound: Some(bound),
            remainder_indicator: None,
            exact: None,
        })
    }

    /// Explicit upper bound on `|g(n) - main_term(n)|` for `Delta_1 <= 0`.
    pub fn error_bound(&self, n: i64) -> Result<f64> {
        self.check_main(n)?;
        let big_n = effective_trunc(n, self.eq.delta2())?;
        bound_from(&self.eq, &self.inv, n, big_n)
    }

    /// Convergent series for `Delta_1 > 0`, summed over `k <= k_max`.
    pub fn sussman_term(&mut self, n: i64, k_max: i64) -> Result<AsymptoticEstimate> {
        self.check_sussman(n, k_max)?;
        let k_max = k_max as u64;
        let order = BesselOrder::convergent_series(self.eq.delta1());
        let assembled = self.assemble(order, n, k_max)?;
        let last = assembled
            .contributions
            .iter()
            .rev()
            .find(|c| !c.value.is_zero())
            .map(|c| c.value_f64().abs())
            .unwrap_or(0.0);
        Ok(AsymptoticEstimate {
            n,
            branch: Branch::Sussman,
            trunc_n: k_max,
            contributions: assembled.contributions,
            main_total: assembled.total,
            imag_ratio: assembled.imag_ratio,
            error_bound: None,
            remainder_indicator: Some(last),
            exact: None,
        })
    }

    /// Main term if `Delta_1 <= 0`, otherwise the convergent series with `k_max`
    /// (default [`default_kmax`]).
    pub fn estimate(&mut self, n: i64, k_max: Option<i64>) -> Result<AsymptoticEstimate> {
        if self.eq.delta1().twice() <= 0 {
            self.main_term(n)
        } else {
            let k_max = k_max.unwrap_or_else(|| default_kmax(&self.eq, n));
            self.sussman_term(n, k_max)
        }
    }
}

struct Assembled {
    contributions: Vec<Contribution>,
    total: Float,
    imag_ratio: f64,
}

/// Main term for `Delta_1 <= 0`, truncated at `N = floor(sqrt(2 pi (n + Delta_2/24)))`.
pub fn main_term(eq: &EtaQuotient, n: i64) -> Result<AsymptoticEstimate> {
    Evaluator::new(eq).main_term(n)
}

/// Explicit upper bound on `|g(n) - main_term(n)|` for `Delta_1 <= 0`.
pub fn error_bound(eq: &EtaQuotient, n: i64) -> Result<f64> {
    let inv = check_main(eq, n)?;
    let big_n = effective_trunc(n, eq.delta2())?;
    bound_from(eq, &inv, n, big_n)
}

fn bound_from(eq: &EtaQuotient, inv: &QuotientInvariants, n: i64, big_n: u64) -> Result<f64> {
    let d1 = eq.delta1();
    let d1f = d1.to_f64();
    let nf = big_n as f64;
    let shifted = n as f64 + eq.delta2() as f64 / 24.0;
    let rho = 1.0 / (nf * nf);
    let growth = (2.0 * PI * rho * shifted).exp();

    // Each (h, k) with k in a positive class contributes its key-integral
    // error times Delta_4(l); there are at most N^2 such pairs per class.
    let mut pos_exp = 0.0;
    let mut pos_plain = 0.0;
    for &l in &inv.l_pos {
        let d3 = inv.delta3(l).to_f64().unwrap();
        let d4 = inv.delta4(l);
        pos_exp += d4 * (d3 * PI / 3.0).exp();
        pos_plain += d4 * (PI * d3 / 24.0).exp();
    }
    let first = 2f64.powf(-d1f) / PI * nf.powf(-d1f + 2.0) / shifted * growth * pos_exp;

    let mut all = 0.0;
    for l in inv.residues() {
        let d3 = inv.delta3(l).to_f64().unwrap();
        let mut s = PI * d3 / 24.0;
        for (m, d) in eq.factors() {
            let g = m.gcd(&l) as f64;
            let y = (-PI * g * g / m as f64).exp();
            s += d.unsigned_abs() as f64 * y / ((1.0 - y) * (1.0 - y));
        }
        all += inv.delta4(l) * s.exp();
    }
    let second = 2.0 * growth * xi(d1, nf)? * (all - pos_plain);
    Ok(first + second)
}

/// Convergent series for `Delta_1 > 0`, summed over `k <= k_max`.
pub fn sussman_term(eq: &EtaQuotient, n: i64, k_max: i64) -> Result<AsymptoticEstimate> {
    Evaluator::new(eq).sussman_term(n, k_max)
}

/// Default truncation for the convergent series: `ceil(sqrt(n)) + L`.
pub fn default_kmax(eq: &EtaQuotient, n: i64) -> i64 {
    let n = n.max(0) as u64;
    let root = n.isqrt();
    let ceil = if root * root == n { root } else { root + 1 };
    ceil as i64 + eq.big_l() as i64
}

/// Main term if `Delta_1 <= 0`, otherwise the convergent series with `k_max`
/// (default [`default_kmax`]).
pub fn estimate(eq: &EtaQuotient, n: i64, k_max: Option<i64>) -> Result<AsymptoticEstimate> {
    Evaluator::new(eq).estimate(n, k_max)
}

/// `sum_{k0 < k <= N, k = k0 mod L} |I_nu(x_k) / k * A_k(n)|` against
/// `exp(pi sqrt(Delta_3(l) (24n + Delta_2)) / (6 k0))`.
pub fn tail_diagnostic(eq: &EtaQuotient, n: i64, k0: u64) -> Result<TailDiagnostic> {
    let inv = check_main(eq, n)?;
    let residue = eq.residue(k0.max(1));
    if k0 == 0 || !inv.is_positive_class(k0) {
        return Err(Error::Hypothesis(Hypothesis::NotPositiveClass { k0, residue }));
    }
    let big_n = effective_trunc(n, eq.delta2())?;
    let m24 = (24 * n + eq.delta2()) as f64;
    let d3 = inv.delta3(residue).to_f64().unwrap();
    let root = PI * (d3 * m24).sqrt() / 6.0;
    let order = BesselOrder::main_theorem(eq.delta1());
    let step = eq.big_l();
    let mut tail = 0.0;
    let mut k = k0 + step;
    while k <= big_n {
        let a = crate::arith::exp_sum(eq, n, k as i64)?;
        tail += bessel_i(order, root / k as f64)? / k as f64 * a.norm();
        k += step;
    }
    Ok(TailDiagnostic { residue, k0, tail, scale: (root / k0 as f64).exp() })
}
