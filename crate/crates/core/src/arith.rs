//! Dedekind sums, multiplier phases and the `gamma_(m,k)` matrices.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::quotient::EtaQuotient;
use crate::Rational;

/// Exact value of `s(d, c) = sum_{n mod c} ((dn/c)) ((n/c))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DedekindSum(Rational);

impl DedekindSum {
    pub fn value(self) -> Rational {
        self.0
    }
}

/// `s(d, c)` through the reciprocity law, `O(log c)` steps.
///
/// `s` is periodic in `d` and homogeneous (`s(ad, ac) = s(d, c)`), so the pair
/// is first reduced to `0 <= d < c` coprime. Callers in this crate always pass
/// coprime pairs; the reduction only matters for direct use.
pub fn dedekind_sum(d: i64, c: i64) -> Result<DedekindSum> {
    if c <= 0 {
        return Err(Error::NonPositiveModulus(c));
    }
    let g = d.gcd(&c);
    let (mut h, mut k) = ((d / g).rem_euclid(c / g) as i128, (c / g) as i128);
    let mut acc = Ratio::<i128>::zero();
    let mut positive = true;
    // s(h, k) + s(k, h) = -1/4 + (h^2 + k^2 + 1) / (12 h k)
    while h != 0 {
        let step = Ratio::new(h * h + k * k + 1, 12 * h * k) - Ratio::new(1, 4);
        if positive {
            acc += step;
        } else {
            acc -= step;
        }
        (h, k) = (k % h, h);
        positive = !positive;
    }
    let numer = acc.numer().to_i64().expect("6c s(d,c) fits in i64");
    let denom = acc.denom().to_i64().expect("denominator divides 6c");
    Ok(DedekindSum(Rational::new(numer, denom)))
}

/// `s(d, c)` by summing the `c - 1` sawtooth products directly. Reference
/// implementation for [`dedekind_sum`].
pub fn dedekind_sum_direct(d: i64, c: i64) -> Result<DedekindSum> {
    if c <= 0 {
        return Err(Error::NonPositiveModulus(c));
    }
    let c128 = c as i128;
    let d128 = d as i128;
    // ((a/c)) = (2 (a mod c) - c) / (2c) off the integers
    let mut numer: i128 = 0;
    for n in 1..c128 {
        let a = (d128 * n).rem_euclid(c128);
        if a != 0 {
            numer += (2 * a - c128) * (2 * n - c128);
        }
    }
    let value = Ratio::new(numer, 4 * c128 * c128);
    Ok(DedekindSum(Rational::new(
        value.numer().to_i64().expect("small"),
        value.denom().to_i64().expect("small"),
    )))
}

/// Phase `theta` of `omega_{h,k} = exp(-pi i theta)`, kept reduced to `[0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OmegaExponent(Rational);

impl OmegaExponent {
    pub fn theta(self) -> Rational {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        phase_to_complex(self.0)
    }
}

/// `r mod 2` in `[0, 2)`.
pub(crate) fn reduce_mod2(r: Rational) -> Rational {
    let two = Rational::from_integer(2);
    r - two * (r / two).floor()
}

/// `exp(-pi i r)` for an exact rational `r`.
pub(crate) fn phase_to_complex(r: Rational) -> Complex64 {
    let x = std::f64::consts::PI * reduce_mod2(r).to_f64().expect("finite");
    Complex64::new(x.cos(), -x.sin())
}

fn check_coprime(h: i64, k: i64) -> Result<()> {
    if k <= 0 {
        return Err(Error::NonPositiveModulus(k));
    }
    let g = h.gcd(&k);
    if g != 1 {
        return Err(Error::NotCoprime { h, k, gcd: g });
    }
    Ok(())
}

/// `omega_{h,k} = exp(-pi i sum_r delta_r s(m_r h / gcd(m_r,k), k / gcd(m_r,k)))`.
///
/// The first argument of each Dedekind sum is reduced modulo the second.
pub fn omega(eq: &EtaQuotient, h: i64, k: i64) -> Result<OmegaExponent> {
    check_coprime(h, k)?;
    if !(0..k).contains(&h) {
        return Err(Error::ResidueOutOfRange { h, k });
    }
    Ok(omega_unchecked(eq, h, k))
}

pub(crate) fn omega_unchecked(eq: &EtaQuotient, h: i64, k: i64) -> OmegaExponent {
    let mut theta = Rational::zero();
    for (m, d) in eq.factors() {
        let m = m as i64;
        let g = m.gcd(&k);
        let c = k / g;
        let s = dedekind_sum((m / g * h).rem_euclid(c), c).expect("positive modulus");
        theta += s.value() * d;
    }
    OmegaExponent(reduce_mod2(theta))
}

/// Exact phases `theta_{h,k} + 2nh/k mod 2` of the terms of
/// `sum_{0<=h<k, (h,k)=1} omega_{h,k} e(-nh/k)`, in increasing `h`.
pub fn exp_sum_phases(eq: &EtaQuotient, n: i64, k: i64) -> Result<Vec<Rational>> {
    if k <= 0 {
        return Err(Error::NonPositiveModulus(k));
    }
    let n_mod = n.rem_euclid(k);
    Ok((0..k)
        .filter(|h| h.gcd(&k) == 1)
        .map(|h| {
            let theta = omega_unchecked(eq, h, k).theta();
            reduce_mod2(theta + Rational::new(2 * ((n_mod * h) % k), k))
        })
        .collect())
}

/// `sum_{0<=h<k, (h,k)=1} omega_{h,k} e(-nh/k)` in double precision.
pub fn exp_sum(eq: &EtaQuotient, n: i64, k: i64) -> Result<Complex64> {
    if n < 0 {
        return Err(Error::Negative { what: "n", value: n });
    }
    Ok(exp_sum_phases(eq, n, k)?.into_iter().map(phase_to_complex).sum())
}

/// Integer matrix `[[a, b], [c, d]]` of determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GammaMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl GammaMatrix {
    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// Mobius action `(a tau + b) / (c tau + d)`.
    pub fn apply(&self, tau: Complex64) -> Complex64 {
        (tau * self.a as f64 + self.b as f64) / (tau * self.c as f64 + self.d as f64)
    }
}

/// `gamma_(m,k) = [[h~, -b], [k', -m'h]]` with `g = gcd(m,k)`, `m = g m'`,
/// `k = g k'`, `h~ m' h = -1 mod k'` (least non-negative `h~`) and
/// `b = (h~ m' h + 1) / k'`.
pub fn gamma_matrix(m: i64, k: i64, h: i64) -> Result<GammaMatrix> {
    if m <= 0 {
        return Err(Error::Domain(format!("m must be positive, got {m}")));
    }
    check_coprime(h, k)?;
    let g = m.gcd(&k);
    let (m1, k1) = (m / g, k / g);
    let unit = (m1 * h).rem_euclid(k1);
    let egcd = unit.extended_gcd(&k1);
    assert_eq!(egcd.gcd, 1, "gcd(m'h, k') = 1 whenever gcd(h, k) = 1");
    let h_tilde = (-egcd.x).rem_euclid(k1);
    let numer = h_tilde * m1 * h + 1;
    debug_assert_eq!(numer.rem_euclid(k1), 0);
    let b = numer / k1;
    Ok(GammaMatrix { a: h_tilde, b: -b, c: k1, d: -m1 * h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn g1() -> EtaQuotient {
        EtaQuotient::new(vec![1, 2, 10], vec![-2, 3, -1]).unwrap()
    }

    #[test]
    fn dedekind_examples() {
        for d in [-7, 0, 1, 5, 123] {
            assert_eq!(dedekind_sum(d, 1).unwrap().value(), r(0, 1));
        }
        assert_eq!(dedekind_sum(1, 3).unwrap().value(), r(1, 18));
        assert_eq!(dedekind_sum_direct(1, 3).unwrap().value(), r(1, 18));
        let lhs = dedekind_sum_direct(5, 7).unwrap().value() + dedekind_sum_direct(7, 5).unwrap().value();
        let rhs = r(-1, 4) + (r(5, 7) + r(7, 5) + r(1, 35)) / 12;
        assert_eq!(lhs, rhs);
        assert_eq!(dedekind_sum(5, 7).unwrap(), dedekind_sum_direct(5, 7).unwrap());
    }

    #[test]
    fn dedekind_rejects_bad_modulus() {
        assert_eq!(dedekind_sum(1, 0), Err(Error::NonPositiveModulus(0)));
        assert_eq!(dedekind_sum_direct(1, -4), Err(Error::NonPositiveModulus(-4)));
    }

    #[test]
    fn fast_matches_direct_including_non_coprime_and_negative() {
        for c in 1..=60 {
            for d in -70..=70 {
                assert_eq!(dedekind_sum(d, c).unwrap(), dedekind_sum_direct(d, c).unwrap(), "s({d},{c})");
            }
        }
    }

    #[test]
    fn reciprocity_and_integrality_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 500 {
            let h: i64 = rng.gen_range(1..5000);
            let k: i64 = rng.gen_range(1..5000);
            if h.gcd(&k) != 1 {
                continue;
            }
            let shk = dedekind_sum(h, k).unwrap().value();
            let skh = dedekind_sum(k, h).unwrap().value();
            assert_eq!(shk + skh, r(-1, 4) + (r(h, k) + r(k, h) + r(1, h * k)) / 12);
            assert!((shk * (6 * k)).is_integer());
            assert_eq!(dedekind_sum(h + 3 * k, k).unwrap().value(), shk);
            checked += 1;
        }
    }

    #[test]
    fn omega_examples() {
        let p = EtaQuotient::partitions();
        assert_eq!(omega(&p, 0, 1).unwrap().theta(), r(0, 1));
        assert_eq!(omega(&g1(), 0, 1).unwrap().theta(), r(0, 1));
        assert_eq!(omega(&p, 1, 3).unwrap().theta(), reduce_mod2(r(-1, 18)));
        assert_eq!(omega(&p, 1, 3).unwrap().theta(), r(35, 18));
        assert!(matches!(omega(&p, 2, 4), Err(Error::NotCoprime { gcd: 2, .. })));
        assert!(matches!(omega(&p, 5, 3), Err(Error::ResidueOutOfRange { .. })));
    }

    #[test]
    fn omega_is_unimodular() {
        let eq = g1();
        for k in 1..40 {
            for h in (0..k).filter(|h| h.gcd(&k) == 1) {
                let w = omega(&eq, h, k).unwrap();
                assert!((0..2).contains(&w.theta().floor().to_integer()));
                assert!((w.to_complex().norm() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exp_sum_examples() {
        for eq in [EtaQuotient::partitions(), g1()] {
            for n in [0, 1, 7, 1000] {
                let v = exp_sum(&eq, n, 1).unwrap();
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
        // s(1,2) = 0, so the single term is e(-n/2) = (-1)^n
        for n in 0..10 {
            let v = exp_sum(&EtaQuotient::partitions(), n, 2).unwrap();
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn exp_sum_is_periodic_and_real() {
        let eq = g1();
        for k in 1..30 {
            for n in 0..15 {
                let a = exp_sum(&eq, n, k).unwrap();
                let b = exp_sum(&eq, n + k, k).unwrap();
                assert!((a - b).norm() < 1e-12, "k={k} n={n}");
                assert!(a.im.abs() < 1e-9 * k as f64);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_matrix(1, 1, 0).unwrap(), GammaMatrix { a: 0, b: -1, c: 1, d: 0 });
        // g = 2, m' = 1, k' = 2, h~ = 1, b = 1
        assert_eq!(gamma_matrix(2, 4, 1).unwrap(), GammaMatrix { a: 1, b: -1, c: 2, d: -1 });
        assert!(matches!(gamma_matrix(2, 4, 2), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn gamma_determinant_and_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 1000 {
            let m: i64 = rng.gen_range(1..30);
            let k: i64 = rng.gen_range(1..60);
            let h: i64 = rng.gen_range(0..k);
            if h.gcd(&k) != 1 {
                continue;
            }
            let gm = gamma_matrix(m, k, h).unwrap();
            assert_eq!(gm.det(), 1);
            let g = m.gcd(&k);
            assert_eq!(gm.c, k / g);
            assert_eq!(gm.d, -(m / g) * h);
            let z = Complex64::new(rng.gen_range(0.05..1.0), rng.gen_range(-1.0..1.0));
            let tau = (Complex64::new(h as f64, 0.0) + Complex64::i() * z) / k as f64;
            let lhs = gm.apply(tau * m as f64);
            let rhs = Complex64::new((gm.a * g) as f64 / k as f64, 0.0)
                + Complex64::i() * ((g * g) as f64 / (m * k) as f64) / z;
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()), "m={m} k={k} h={h}");
            checked += 1;
        }
    }
}
