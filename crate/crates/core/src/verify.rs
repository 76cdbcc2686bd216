//! Numerical checks of the machinery behind the error bound: the modular
//! transformation law of `G`, the Farey dissection and the growth lemmas for
//! `F(q) = 1 / (q; q)_inf`.
//!
//! Products are evaluated in the log domain, `log F(q) = -sum_j log(1 - q^j)`,
//! stopping once `|q^j| < 1e-18`. Sample points keep `Re(z) > 0`, so every
//! principal-branch power and root stays away from its cut.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer as _;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rug::Float;

use crate::arith::{gamma_matrix, omega};
use crate::error::{Error, Result};
use crate::quotient::EtaQuotient;
use crate::Rational;

/// Product truncation threshold on `|q|^j`.
pub const PRODUCT_EPS: f64 = 1e-18;
/// Default tolerance on transformation residuals.
pub const TRANSFORM_TOL: f64 = 1e-8;
/// Documented sampling band for `Re(z)`.
pub const RE_Z_RANGE: (f64, f64) = (0.05, 1.0);

/// `tau = (h + i z) / k` with `gcd(h, k) = 1`, `0 <= h < k` and `Re(z) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    h: i64,
    k: i64,
    z: Complex64,
}

impl SamplePoint {
    pub fn new(h: i64, k: i64, z: Complex64) -> Result<Self> {
        if k <= 0 {
            return Err(Error::NonPositiveModulus(k));
        }
        if !(0..k).contains(&h) {
            return Err(Error::ResidueOutOfRange { h, k });
        }
        let g = h.gcd(&k);
        if g != 1 {
            return Err(Error::NotCoprime { h, k, gcd: g });
        }
        if !(z.re > 0.0) || !z.im.is_finite() {
            return Err(Error::Domain(format!("sample point needs Re(z) > 0, got z = {z}")));
        }
        Ok(SamplePoint { h, k, z })
    }

    /// `z = k (rho - i phi)` with `rho = 1/N^2`.
    pub fn on_arc(h: i64, k: i64, big_n: u64, phi: f64) -> Result<Self> {
        let rho = 1.0 / (big_n as f64 * big_n as f64);
        Self::new(h, k, Complex64::new(k as f64 * rho, -(k as f64) * phi))
    }

    pub fn h(&self) -> i64 {
        self.h
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn tau(&self) -> Complex64 {
        (Complex64::new(self.h as f64, 0.0) + Complex64::i() * self.z) / self.k as f64
    }

    pub fn rho(&self) -> f64 {
        self.z.re / self.k as f64
    }

    pub fn phi(&self) -> f64 {
        -self.z.im / self.k as f64
    }

    /// Uniform `k` in `1..=k_max`, coprime `h`, `Re(z)` in [`RE_Z_RANGE`], `Im(z)` in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, k_max: i64) -> Self {
        let k = rng.gen_range(1..=k_max.max(1));
        let h = loop {
            let h = rng.gen_range(0..k);
            if h.gcd(&k) == 1 {
                break h;
            }
        };
        let z = Complex64::new(rng.gen_range(RE_Z_RANGE.0..=RE_Z_RANGE.1), rng.gen_range(-1.0..=1.0));
        SamplePoint { h, k, z }
    }

    /// A point on the Farey arc of `h/k` at order `N`: `phi` uniform in `[-theta', theta'']`.
    pub fn random_on_arc<R: Rng + ?Sized>(rng: &mut R, arc: &FareyArc, big_n: u64) -> Self {
        let left = arc.theta_left.to_f64().unwrap();
        let right = arc.theta_right.to_f64().unwrap();
        // phi > 0 moves tau to the right of h/k
        let phi = rng.gen_range(-left..=right);
        SamplePoint::on_arc(arc.h, arc.k, big_n, phi).expect("Farey fractions are reduced")
    }
}

/// Fraction `h/k` of the Farey sequence of order `N` with distances to the
/// neighbouring mediants on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FareyArc {
    pub h: i64,
    pub k: i64,
    pub theta_left: Rational,
    pub theta_right: Rational,
}

impl FareyArc {
    pub fn length(&self) -> Rational {
        self.theta_left + self.theta_right
    }

    pub fn center(&self) -> Rational {
        Rational::new(self.h, self.k)
    }
}

/// Farey fractions of order `N` in `[0, 1)`, in increasing order, with their arcs.
///
/// The dissection is of the circle, so `0/1` has the left neighbour `-1/N`
/// and the last fraction `(N-1)/N` has the right neighbour `1/1`.
pub fn farey_arcs(order_n: u64) -> Result<Vec<FareyArc>> {
    if order_n == 0 {
        return Err(Error::Domain("Farey order must be at least 1".into()));
    }
    let n = order_n as i64;
    // standard next-term iteration over [0, 1]
    let mut seq = vec![(0i64, 1i64)];
    let (mut a, mut b, mut c, mut d) = (0i64, 1i64, 1i64, n);
    while c <= n {
        let t = (n + b) / d;
        let next = (t * c - a, t * d - b);
        seq.push((c, d));
        (a, b, c, d) = (c, d, next.0, next.1);
    }
    // seq runs 0/1 .. 1/1; drop the final 1/1 but keep it as a neighbour
    let len = seq.len() - 1;
    let mut arcs = Vec::with_capacity(len);
    for i in 0..len {
        let (h, k) = seq[i];
        let left_den = if i == 0 { n } else { seq[i - 1].1 };
        let right_den = seq[i + 1].1;
        arcs.push(FareyArc {
            h,
            k,
            theta_left: Rational::new(1, k * (k + left_den)),
            theta_right: Rational::new(1, k * (k + right_den)),
        });
    }
    Ok(arcs)
}

/// `e(y) = exp(2 pi i y)`.
fn e(y: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * y).exp()
}

fn check_upper(y: Complex64) -> Result<()> {
    if !(y.im > 0.0) {
        return Err(Error::Domain(format!("point must lie in the upper half-plane, got {y}")));
    }
    Ok(())
}

/// Smallest `T` with `|e(y)|^T < 1e-16`.
pub fn default_trunc(y: Complex64) -> Result<u64> {
    check_upper(y)?;
    let per = 2.0 * PI * y.im;
    Ok((16.0 * std::f64::consts::LN_10 / per).floor() as u64 + 1)
}

/// `1 / prod_{j <= trunc} (1 - q^j)` at `q = e(y)`.
pub fn eta_f(y: Complex64, trunc: u64) -> Result<Complex64> {
    check_upper(y)?;
    let q = e(y);
    let mut qj = Complex64::new(1.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    for _ in 0..trunc {
        qj *= q;
        prod *= Complex64::new(1.0, 0.0) - qj;
    }
    Ok(prod.inv())
}

/// `log F(e(y)) = -sum_j log(1 - q^j)`, summed until `|q^j| < 1e-18`.
pub fn log_eta_f(y: Complex64) -> Result<Complex64> {
    check_upper(y)?;
    let q = e(y);
    let mut qj = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::zero();
    loop {
        qj *= q;
        if qj.norm() < PRODUCT_EPS {
            break;
        }
        sum -= (Complex64::new(1.0, 0.0) - qj).ln();
    }
    Ok(sum)
}

/// `log G(e(tau))`.
fn log_g(eq: &EtaQuotient, tau: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::zero();
    for (m, d) in eq.factors() {
        acc -= log_eta_f(tau * m as f64)? * d as f64;
    }
    Ok(acc)
}

fn relative(log_lhs: Complex64, log_rhs: Complex64) -> f64 {
    ((log_rhs - log_lhs).exp() - 1.0).norm()
}

/// `|LHS - RHS| / |LHS|` for the transformation law
///
/// ```text
/// G(e(tau)) = exp(pi/(12k) (Delta_3(k)/z + Delta_2 z)) z^{Delta_1} omega_{h,k} Delta_4(k)
///             * prod_r F(e(gamma_{(m_r,k)}(m_r tau)))^{-delta_r}
/// ```
pub fn check_transform(eq: &EtaQuotient, pt: &SamplePoint) -> Result<f64> {
    let (h, k, z) = (pt.h, pt.k, pt.z);
    let tau = pt.tau();
    let lhs = log_g(eq, tau)?;

    let ku = k as u64;
    let d3 = eq.delta3(ku).to_f64().unwrap();
    let d2 = eq.delta2() as f64;
    let d4 = eq.delta4_sq(ku).to_f64().sqrt();
    let theta = omega(eq, h, k)?.theta().to_f64().unwrap();
    let mut rhs = (d3 / z + z * d2) * (PI / (12.0 * k as f64))
        + z.ln() * eq.delta1().to_f64()
        + Complex64::new(d4.ln(), -PI * theta);
    for (m, d) in eq.factors() {
        let gamma = gamma_matrix(m as i64, k, h)?;
        rhs -= log_eta_f(gamma.apply(tau * m as f64))? * d as f64;
    }
    Ok(relative(lhs, rhs))
}

/// Residual of the single-factor law
///
/// ```text
/// F(e(m tau)) = exp(pi/(12k) (g^2/(m z) - m z)) e(s(mh/g, k/g)/2) sqrt(m z / g) F(e(gamma_{(m,k)}(m tau)))
/// ```
/// with `g = gcd(m, k)`.
pub fn check_factor_transform(m: u64, pt: &SamplePoint) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    let (h, k, z) = (pt.h, pt.k, pt.z);
    let mi = m as i64;
    let mf = m as f64;
    let g = mi.gcd(&k);
    let gf = g as f64;
    let tau = pt.tau();
    let lhs = log_eta_f(tau * mf)?;
    let c = k / g;
    let s = crate::arith::dedekind_sum((mi / g * h).rem_euclid(c), c)?.value().to_f64().unwrap();
    let gamma = gamma_matrix(mi, k, h)?;
    let rhs = (gf * gf / (mf * z) - z * mf) * (PI / (12.0 * k as f64))
        + Complex64::new(0.0, PI * s)
        + (z * mf / gf).ln() * 0.5
        + log_eta_f(gamma.apply(tau * mf))?;
    Ok(relative(lhs, rhs))
}

/// Margins of the geometric and growth inequalities at one arc point; each is
/// `rhs - lhs` and must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    /// `Re(1/z) - k/2`.
    pub re_inv_z: f64,
    /// `|z| - k/N^2`; zero exactly when `phi = 0`.
    pub abs_z: f64,
    /// Smallest `log(rhs) - log|F(e(gamma(m tau)))|` over the factors.
    pub bound_f: f64,
    /// Smallest `log(rhs) - log|1/F(e(gamma(m tau)))|` over the factors.
    pub bound_inv_f: f64,
    /// `log10((rhs - lhs) / rhs)` for the product inequality with
    /// `eta_r = -delta_r`; NaN when the inequality fails.
    ///
    /// Both sides agree to first order in `e^{-2 pi Im(y_r)}`, so this one is
    /// evaluated in MPFR and reported on a log scale.
    pub rough_log10: f64,
}

impl BoundsReport {
    /// Smallest of the strict absolute margins.
    pub fn min_margin(&self) -> f64 {
        [self.re_inv_z, self.bound_f, self.bound_inv_f].into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn all_positive(&self) -> bool {
        self.min_margin() > 0.0 && self.abs_z >= 0.0 && self.rough_log10.is_finite()
    }
}

/// `x / (1 - x)^2`.
fn growth(x: f64) -> f64 {
    x / ((1.0 - x) * (1.0 - x))
}

/// Evaluates the bound lemmas at a point of the order-`N` dissection.
pub fn check_bounds(eq: &EtaQuotient, pt: &SamplePoint, big_n: u64) -> Result<BoundsReport> {
    let (h, k, z) = (pt.h, pt.k, pt.z);
    let nf = big_n as f64;
    let kf = k as f64;
    let rho = 1.0 / (nf * nf);
    if big_n == 0 || k as u64 > big_n {
        return Err(Error::Domain(format!("need 1 <= k <= N, got k = {k}, N = {big_n}")));
    }
    if ((pt.rho() - rho) / rho).abs() > 1e-12 || pt.phi().abs() > (1.0 + 1e-12) / (kf * nf) {
        return Err(Error::Domain(format!(
            "point is off the arc geometry: rho = {}, phi = {} for k = {k}, N = {big_n}",
            pt.rho(),
            pt.phi()
        )));
    }
    let re_inv_z = z.inv().re - kf / 2.0;
    let abs_z = z.norm() - kf / (nf * nf);

    let tau = pt.tau();
    let mut bound_f = f64::INFINITY;
    let mut bound_inv_f = f64::INFINITY;
    let mut points = Vec::with_capacity(eq.len());
    for (m, d) in eq.factors() {
        let g = (m as i64).gcd(&k) as f64;
        let y = gamma_matrix(m as i64, k, h)?.apply(tau * m as f64);
        let log_f = log_eta_f(y)?;
        let cap = growth((-PI * g * g / m as f64).exp());
        bound_f = bound_f.min(cap - log_f.re);
        bound_inv_f = bound_inv_f.min(cap + log_f.re);
        // eta_r = -delta_r
        points.push((y, -d));
    }
    let rough_log10 = rough_margin_log10(&points);
    Ok(BoundsReport { re_inv_z, abs_z, bound_f, bound_inv_f, rough_log10 })
}

/// Complex number as a pair of MPFR floats.
#[derive(Clone)]
struct MpComplex {
    re: Float,
    im: Float,
}

impl MpComplex {
    fn mul(&self, other: &MpComplex) -> MpComplex {
        let prec = self.re.prec();
        let re = Float::with_val(prec, &self.re * &other.re) - Float::with_val(prec, &self.im * &other.im);
        let im = Float::with_val(prec, &self.re * &other.im) + Float::with_val(prec, &self.im * &other.re);
        MpComplex { re, im }
    }

    fn abs(&self) -> Float {
        Float::with_val(self.re.prec(), self.re.hypot_ref(&self.im))
    }

    /// `log(1 - w)` for `|w| < 1`, principal branch.
    fn ln_one_minus(&self) -> MpComplex {
        let prec = self.re.prec();
        let a = Float::with_val(prec, 1 - &self.re);
        let b = Float::with_val(prec, -&self.im);
        // log|1 - w| = log1p(-2 Re w + |w|^2) / 2
        let t = Float::with_val(prec, self.re.square_ref()) + Float::with_val(prec, self.im.square_ref())
            - Float::with_val(prec, &self.re * 2u32);
        MpComplex { re: t.ln_1p() / 2u32, im: b.atan2(&a) }
    }
}

/// `log10((rhs - lhs) / rhs)` for `|prod F(e(y_r))^{eta_r} - 1| <= exp(sum |eta_r| x_r/(1-x_r)^2) - 1`,
/// `x_r = e^{-2 pi Im(y_r)}`; NaN if the inequality fails.
fn rough_margin_log10(points: &[(Complex64, i64)]) -> f64 {
    let max_im = points.iter().map(|(y, _)| y.im).fold(0.0, f64::max);
    // the relative margin is of order x^2; keep 2 log2(1/x) bits plus slack
    let bits = 4.0 * PI * max_im * std::f64::consts::LOG2_E;
    let prec = 192 + bits.ceil() as u32;
    let pi_p = Float::with_val(prec, rug::float::Constant::Pi);
    let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) - 8));

    let mut w = MpComplex { re: Float::with_val(prec, 0), im: Float::with_val(prec, 0) };
    let mut rhs_exp = Float::with_val(prec, 0);
    for &(y, eta) in points {
        let two_pi = Float::with_val(prec, &pi_p * 2u32);
        let x = Float::with_val(prec, -Float::with_val(prec, &two_pi * y.im)).exp();
        let angle = Float::with_val(prec, &two_pi * y.re);
        let (sin, cos) = angle.sin_cos(Float::new(prec));
        let q = MpComplex { re: Float::with_val(prec, &x * &cos), im: Float::with_val(prec, &x * &sin) };
        // log F(q) = -sum_j log(1 - q^j)
        let mut log_f = MpComplex { re: Float::with_val(prec, 0), im: Float::with_val(prec, 0) };
        let mut qj = q.clone();
        while qj.abs() > eps {
            let l = qj.ln_one_minus();
            log_f.re -= l.re;
            log_f.im -= l.im;
            qj = qj.mul(&q);
        }
        w.re += Float::with_val(prec, &log_f.re * eta);
        w.im += Float::with_val(prec, &log_f.im * eta);
        let one_minus = Float::with_val(prec, 1 - &x);
        rhs_exp += Float::with_val(prec, &x * eta.unsigned_abs()) / one_minus.square();
    }
    // exp(w) - 1 = expm1(a) cos b - 2 sin^2(b/2) + i e^a sin b
    let (sin_b, cos_b) = w.im.clone().sin_cos(Float::new(prec));
    let half_sin = Float::with_val(prec, &w.im / 2u32).sin();
    let re = Float::with_val(prec, w.re.exp_m1_ref()) * &cos_b - Float::with_val(prec, half_sin.square_ref()) * 2u32;
    let im = Float::with_val(prec, w.re.exp_ref()) * sin_b;
    let lhs = MpComplex { re, im }.abs();
    let rhs = rhs_exp.exp_m1();
    let margin = Float::with_val(prec, &rhs - &lhs);
    if margin <= 0 || rhs <= 0 {
        return f64::NAN;
    }
    (margin / rhs).log10().to_f64()
}

/// Outcome of a seeded verification batch.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub samples: usize,
    pub max_transform_residual: f64,
    pub transform_failures: usize,
    pub min_bound_margin: f64,
    pub bound_failures: usize,
    pub farey_orders_checked: u64,
    pub farey_failures: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.transform_failures == 0 && self.bound_failures == 0 && self.farey_failures == 0
    }
}

/// Orders of the dissection sampled by [`run_verification`].
pub const ARC_ORDERS: [u64; 3] = [5, 10, 25];

/// Transformation residuals at `samples` random points with `k <= 12`, bound
/// margins at `samples` random arc points of each order in [`ARC_ORDERS`], and
/// the Farey inequalities for every order up to `farey_max`.
pub fn run_verification<R: Rng + ?Sized>(
    eq: &EtaQuotient,
    samples: usize,
    farey_max: u64,
    rng: &mut R,
) -> Result<VerifyReport> {
    let mut max_res = 0.0f64;
    let mut transform_failures = 0;
    for _ in 0..samples {
        let pt = SamplePoint::random(rng, 12);
        let r = check_transform(eq, &pt)?;
        max_res = max_res.max(r);
        if !(r < TRANSFORM_TOL) {
            transform_failures += 1;
        }
    }
    let mut min_margin = f64::INFINITY;
    let mut bound_failures = 0;
    for &big_n in &ARC_ORDERS {
        let arcs = farey_arcs(big_n)?;
        for _ in 0..samples {
            let arc = &arcs[rng.gen_range(0..arcs.len())];
            let pt = SamplePoint::random_on_arc(rng, arc, big_n);
            let report = check_bounds(eq, &pt, big_n)?;
            min_margin = min_margin.min(report.min_margin());
            if !report.all_positive() {
                bound_failures += 1;
            }
        }
    }
    let mut farey_failures = 0;
    for order in 1..=farey_max {
        farey_failures += farey_violations(order)?;
    }
    Ok(VerifyReport {
        samples,
        max_transform_residual: max_res,
        transform_failures,
        min_bound_margin: min_margin,
        bound_failures,
        farey_orders_checked: farey_max,
        farey_failures,
    })
}

/// Number of arcs of order `N` breaking `1/(2kN) <= theta', theta'' <= 1/(kN)`
/// or `1/(kN) <= theta' + theta'' <= 2/(kN)`, plus one if neighbouring arcs fail to meet.
pub fn farey_violations(order_n: u64) -> Result<usize> {
    let arcs = farey_arcs(order_n)?;
    let n = order_n as i64;
    let mut bad = 0;
    for arc in &arcs {
        let lo = Rational::new(1, 2 * arc.k * n);
        let hi = Rational::new(1, arc.k * n);
        let ok = [arc.theta_left, arc.theta_right].iter().all(|t| lo <= *t && *t <= hi)
            && hi <= arc.length()
            && arc.length() <= hi * 2;
        if !ok {
            bad += 1;
        }
    }
    for pair in arcs.windows(2) {
        if pair[0].center() + pair[0].theta_right != pair[1].center() - pair[1].theta_left {
            bad += 1;
        }
    }
    let first = &arcs[0];
    let last = &arcs[arcs.len() - 1];
    if last.center() + last.theta_right != Rational::from_integer(1) - first.theta_left {
        bad += 1;
    }
    Ok(bad)
}
