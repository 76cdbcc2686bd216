//! Fourier coefficients of eta-quotients
//!
//! ```text
//! G(q) = prod_r (q^{m_r}; q^{m_r})_inf^{delta_r} = sum_{n>=0} g(n) q^n
//! ```
//!
//! The crate has two independent routes to `g(n)`:
//!
//! - [`exact`] expands the product as a power series with big-integer
//!   coefficients. This is the ground truth.
//! - [`asymptotic`] evaluates the circle-method main term (a Bessel-weighted
//!   sum over Farey denominators `k`) together with an explicit bound on the
//!   remainder when `sum delta_r >= 0`, and the convergent Rademacher-type
//!   series when `sum delta_r < 0`.
//!
//! [`quotient`] holds the structural invariants both routes share, [`arith`]
//! the exact modular arithmetic (Dedekind sums, multiplier phases, the
//! transformation matrices), [`specfun`] the Bessel kernel and [`verify`] a
//! numerical harness for the transformation laws and bounds behind the
//! error estimate.

pub mod arith;
pub mod asymptotic;
pub mod error;
pub mod exact;
pub mod quotient;
pub mod specfun;
pub mod verify;


pub use arith::{dedekind_sum, exp_sum, gamma_matrix, omega, DedekindSum, GammaMatrix, OmegaExponent};
pub use error::{Error, Hypothesis, Result};
pub use exact::{coefficient, expand, ExactSeries};
pub use quotient::{check_admissible, classify, invariants, AdmissibilityReport, EtaQuotient, HalfInt, QuotientInvariants};
pub use asymptotic::{default_kmax, error_bound, estimate, Evaluator, main_term, sussman_term, tail_diagnostic, trunc_n, AsymptoticEstimate, Branch, Contribution, TailDiagnostic};
pub use specfun::{bessel_i, xi, BesselOrder};
pub use verify::{check_bounds, check_transform, eta_f, farey_arcs, BoundsReport, FareyArc, SamplePoint, VerifyReport};


/// Exact rational used for Dedekind sums, phases and `Delta_3`.
pub type Rational = num_rational::Ratio<i64>;
