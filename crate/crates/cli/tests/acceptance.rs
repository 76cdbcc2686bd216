//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run alone with `cargo test -p etaq --test acceptance`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use etaq_core::arith::dedekind_sum;
use etaq_core::verify::{check_transform, farey_violations, SamplePoint};
use etaq_core::{
    bessel_i, check_admissible, expand, invariants, main_term, BesselOrder, EtaQuotient, Evaluator, Rational,
};
use num_integer::Integer as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Integer};

// Pinned tolerances and budgets.
const C1_BUDGET: Duration = Duration::from_secs(1);
const C2_TOL: f64 = 1e-12;
const C2_BUDGET: Duration = Duration::from_secs(1);
const C3_TOL_1000: f64 = 0.05;
const C3_TOL_4000: f64 = 0.02;
const C3_BUDGET: Duration = Duration::from_secs(60);
const C4_N_MAX: i64 = 2000;
const C4_RANDOM_QUOTIENTS: usize = 5;
const C4_BUDGET: Duration = Duration::from_secs(300);
const C5_N_MAX: i64 = 2000;
const C5_BUDGET: Duration = Duration::from_secs(10);
const C6_N_MAX: i64 = 500;
const C6_BUDGET: Duration = Duration::from_secs(30);
const C7_N_MAX: i64 = 2000;
const C7_SLOPE_SLACK: f64 = 0.1;
const C8_SAMPLES: usize = 50;
const C8_TRANSFORM_TOL: f64 = 1e-8;
const C8_RECIPROCITY_PAIRS: usize = 500;
const C8_FAREY_MAX: u64 = 50;
const C8_BESSEL_TOL: f64 = 1e-10;
const C8_BUDGET: Duration = Duration::from_secs(60);
const SEED: u64 = 20_240_601;

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Outcome { ok, detail: detail.into() }
    }
}

fn q(m: &[u64], d: &[i64]) -> EtaQuotient {
    EtaQuotient::new(m.to_vec(), d.to_vec()).unwrap()
}

fn g1() -> EtaQuotient {
    q(&[1, 2, 10], &[-2, 3, -1])
}

fn gauss() -> EtaQuotient {
    q(&[1, 2], &[2, -1])
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

/// Delta_3 and Delta_4^2 for l = 1..=10 against hand-computed values.
fn c1() -> Outcome {
    let inv = invariants(&g1());
    let d3 = [r(3, 5), r(-18, 5), r(3, 5), r(-18, 5), r(3, 1), r(-18, 5), r(3, 5), r(-18, 5), r(3, 5), r(6, 1)];
    // Delta_4 = sqrt(5)/2, sqrt(5), ..., 1/2, ..., 1
    let d4_sq = [(5, 4), (5, 1), (5, 4), (5, 1), (1, 4), (5, 1), (5, 4), (5, 1), (5, 4), (1, 1)];
    let mut bad = Vec::new();
    for l in 1..=10u64 {
        let i = (l - 1) as usize;
        if inv.delta3(l) != d3[i] || *inv.delta4_sq(l) != rug::Rational::from(d4_sq[i]) {
            bad.push(l);
        }
    }
    let pos_ok = inv.l_pos == vec![1, 3, 5, 7, 9, 10];
    Outcome::new(bad.is_empty() && pos_ok, format!("mismatched l: {bad:?}, L>0 = {:?}", inv.l_pos))
}

/// Bessel-argument coefficients pi sqrt(Delta_3(l)) / (6k) for the six classes.
fn c2() -> Outcome {
    let n = 100;
    let est = main_term(&g1(), n).unwrap();
    let root = ((24 * n - 6) as f64).sqrt();
    let s15 = 15f64.sqrt();
    let expected = [
        (1, PI / (2.0 * s15)),
        (3, PI / (6.0 * s15)),
        (5, PI / (10.0 * 3f64.sqrt())),
        (7, PI / (14.0 * s15)),
        (9, PI / (18.0 * s15)),
        (10, PI / (10.0 * 6f64.sqrt())),
    ];
    let mut worst = 0.0f64;
    for (k, want) in expected {
        let Some(c) = est.contributions.iter().find(|c| c.k == k) else {
            return Outcome::new(false, format!("no shell for k = {k}"));
        };
        worst = worst.max(((c.bessel_arg / root - want) / want).abs());
    }
    Outcome::new(worst < C2_TOL, format!("max rel err {worst:.2e}"))
}

/// g_1(n) against 3^{3/4} 5^{1/4} (24n-6)^{-3/4} exp(pi sqrt(24n-6) / (2 sqrt 15)).
fn c3() -> Outcome {
    let grid = [250i64, 500, 1000, 2000, 4000];
    let series = expand(&g1(), 4000).unwrap();
    let prec = 256;
    let mut ratios = Vec::new();
    for &n in &grid {
        let m = Float::with_val(prec, 24 * n - 6);
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let arg: Float = Float::with_val(prec, m.sqrt_ref()) * pi / (Float::with_val(prec, 15).sqrt() * 2u32);
        let pref = Float::with_val(prec, 3).pow(0.75f64)
            * Float::with_val(prec, 5).pow(0.25f64)
            * Float::with_val(prec, (&m).pow(-0.75f64));
        let asym = pref * arg.exp();
        let g = Float::with_val(prec, &series.coeffs()[n as usize]);
        ratios.push((g / asym).to_f64());
    }
    let dist: Vec<f64> = ratios.iter().map(|x| (x - 1.0).abs()).collect();
    let monotone = dist.windows(2).all(|w| w[1] < w[0]);
    let ok = dist[2] < C3_TOL_1000 && dist[4] < C3_TOL_4000 && monotone;
    let shown: Vec<String> = grid.iter().zip(&ratios).map(|(n, x)| format!("{n}:{x:.5}")).collect();
    Outcome::new(ok, format!("ratios {}", shown.join(" ")))
}

fn random_admissible(rng: &mut ChaCha8Rng, count: usize, want: impl Fn(&EtaQuotient) -> bool) -> Vec<EtaQuotient> {
    let mut out: Vec<EtaQuotient> = Vec::new();
    while out.len() < count {
        let len = rng.gen_range(1..=3);
        let mut ms: Vec<u64> = Vec::new();
        while ms.len() < len {
            let m = rng.gen_range(1..=12);
            if !ms.contains(&m) {
                ms.push(m);
            }
        }
        let ds: Vec<i64> = (0..len).map(|_| loop {
            let d = rng.gen_range(-4..=4);
            if d != 0 {
                break d;
            }
        }).collect();
        let eq = EtaQuotient::new(ms, ds).unwrap();
        if check_admissible(&eq).ok && want(&eq) && !out.contains(&eq) {
            out.push(eq);
        }
    }
    out
}

/// Parses the compare CSV and checks every row against its bound.
fn compare_via_cli(eq: &EtaQuotient, from: i64, to: i64) -> Result<usize, String> {
    let spec = eq.to_string();
    let args = ["etaq", "compare", &spec, "--from", &from.to_string(), "--to", &to.to_string()];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = etaq::run(args, &mut out, &mut err);
    if code != 0 {
        return Err(format!("{spec}: exit {code}: {}", String::from_utf8_lossy(&err).trim()));
    }
    let text = String::from_utf8(out).unwrap();
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let diff: f64 = cols[4].parse().unwrap();
        let bound: f64 = cols[3].parse().unwrap();
        if !(diff <= bound) {
            return Err(format!("{spec}: n = {} has |g - main| = {diff} > {bound}", cols[0]));
        }
        rows += 1;
    }
    Ok(rows)
}

/// Error-bound soundness through the CLI compare channel.
fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut corpus = vec![g1()];
    corpus.extend(random_admissible(&mut rng, C4_RANDOM_QUOTIENTS, |eq| eq.delta1().twice() <= 0));
    let mut checked = 0;
    let mut names = Vec::new();
    for eq in &corpus {
        // smallest positive n with 24n + Delta_2 > 0
        let from = (1..).find(|&n| 24 * n + eq.delta2() > 0).unwrap();
        match compare_via_cli(eq, from, C4_N_MAX) {
            Ok(rows) => checked += rows,
            Err(e) => return Outcome::new(false, e),
        }
        names.push(eq.to_string());
    }
    Outcome::new(true, format!("{checked} rows, quotients [{}]", names.join(" ")))
}

/// Vanishing main term for the theta quotient.
fn c5() -> Outcome {
    let eq = gauss();
    let series = expand(&eq, C5_N_MAX).unwrap();
    let mut ev = Evaluator::new(&eq);
    for n in 0..=C5_N_MAX {
        let g = &series.coeffs()[n as usize];
        let root = (n as f64).sqrt().round() as i64;
        let theta = if n == 0 {
            Integer::from(1)
        } else if root * root == n {
            Integer::from(if root % 2 == 0 { 2 } else { -2 })
        } else {
            Integer::new()
        };
        if *g != theta {
            return Outcome::new(false, format!("g({n}) = {g}, theta series gives {theta}"));
        }
        if n == 0 {
            continue;
        }
        let est = ev.main_term(n).unwrap();
        if !est.main_total.is_zero() || !est.contributions.is_empty() {
            return Outcome::new(false, format!("main term nonzero at n = {n}"));
        }
        let bound = est.error_bound.unwrap();
        if g.to_f64().abs() > bound {
            return Outcome::new(false, format!("|g({n})| = {g} exceeds bound {bound}"));
        }
    }
    Outcome::new(true, format!("n <= {C5_N_MAX}"))
}

/// Partition numbers from the convergent series with k_max = ceil(sqrt n) + 1.
fn c6() -> Outcome {
    let eq = EtaQuotient::partitions();
    let series = expand(&eq, C6_N_MAX).unwrap();
    let mut ev = Evaluator::new(&eq);
    for n in 1..=C6_N_MAX {
        let kmax = (n as f64).sqrt().ceil() as i64 + 1;
        let est = ev.sussman_term(n, kmax).unwrap();
        if est.rounded() != series.coeffs()[n as usize] {
            return Outcome::new(false, format!("n = {n}: rounded {} vs p(n) = {}", est.rounded(), series.coeffs()[n as usize]));
        }
    }
    Outcome::new(true, format!("1 <= n <= {C6_N_MAX}"))
}

/// Least-squares slope of log y against log x.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in points {
        num += (x.ln() - mx) * (y.ln() - my);
        den += (x.ln() - mx).powi(2);
    }
    num / den
}

/// Observed |g(n) - main_total(n)| grows no faster than the stated order.
fn c7() -> Outcome {
    // (quotient, exponent of n in the order)
    let cases = [
        (g1(), 0.0),
        (q(&[1, 2], &[-1, 1]), 0.0),
        (q(&[1, 2], &[-2, 3]), 0.25),
        (q(&[1, 3], &[-1, 2]), 0.25),
        (q(&[1, 4], &[-1, 3]), 0.5),
        (q(&[1, 5], &[-1, 3]), 0.5),
    ];
    let edges = [25i64, 50, 100, 200, 400, 800, 1600, C7_N_MAX + 1];
    let mut details = Vec::new();
    let mut ok = true;
    for (eq, power) in &cases {
        assert!(check_admissible(eq).ok);
        let series = expand(eq, C7_N_MAX).unwrap();
        let mut ev = Evaluator::new(eq);
        let mut devs = vec![0.0; (C7_N_MAX + 1) as usize];
        for n in edges[0]..=C7_N_MAX {
            let est = ev.main_term(n).unwrap().with_exact(series.coeffs()[n as usize].clone());
            devs[n as usize] = est.deviation().unwrap().abs().to_f64();
        }
        // block maxima, placed at the geometric mean of each block
        let blocks: Vec<(f64, f64)> = edges
            .windows(2)
            .map(|w| {
                let max = devs[w[0] as usize..w[1] as usize].iter().cloned().fold(0.0, f64::max);
                (((w[0] * (w[1] - 1)) as f64).sqrt(), max)
            })
            .collect();
        let slope = loglog_slope(&blocks);
        let mut case_ok = slope <= power + C7_SLOPE_SLACK;
        let mut extra = String::new();
        if eq.delta1().twice() == -2 {
            // M / (n^{1/2} log n) must not grow: later blocks stay below the early maximum
            let scaled: Vec<f64> = blocks.iter().map(|(x, m)| m / (x.sqrt() * x.ln())).collect();
            let half = scaled.len() / 2;
            let early = scaled[..half].iter().cloned().fold(0.0, f64::max);
            let late = scaled[half..].iter().cloned().fold(0.0, f64::max);
            case_ok &= late <= early;
            extra = format!(", scaled late/early {:.3}", late / early);
        }
        ok &= case_ok;
        details.push(format!("{eq} (Delta_1 = {}): slope {slope:.3} <= {:.2}{extra}", eq.delta1(), power + C7_SLOPE_SLACK));
    }
    Outcome::new(ok, details.join("; "))
}

/// Independent oracle: the defining power series of I_nu in MPFR with MPFR's gamma.
fn bessel_oracle(twice_nu: i64, x: f64) -> f64 {
    let prec = 256;
    let v = Float::with_val(prec, twice_nu) / 2u32;
    let half = Float::with_val(prec, x) / 2u32;
    let mut sum = Float::with_val(prec, 0);
    for j in 0u32..1500 {
        let power = Float::with_val(prec, &v + 2 * j);
        let term = Float::with_val(prec, (&half).pow(&power))
            / Float::with_val(prec, &v + (j + 1)).gamma()
            / Float::with_val(prec, j + 1).gamma();
        sum += term;
    }
    sum.to_f64()
}

/// Transformation residuals, reciprocity, Farey bounds and the Bessel kernel.
fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut corpus = vec![EtaQuotient::partitions(), gauss(), g1()];
    while corpus.len() < 13 {
        let len = rng.gen_range(1..=3);
        let mut ms: Vec<u64> = Vec::new();
        while ms.len() < len {
            let m = rng.gen_range(1..=12);
            if !ms.contains(&m) {
                ms.push(m);
            }
        }
        let ds: Vec<i64> = (0..len).map(|_| [-3, -2, -1, 1, 2, 3][rng.gen_range(0..6)]).collect();
        corpus.push(EtaQuotient::new(ms, ds).unwrap());
    }
    let mut worst = 0.0f64;
    for eq in &corpus {
        for _ in 0..C8_SAMPLES {
            let pt = SamplePoint::random(&mut rng, 12);
            let res = check_transform(eq, &pt).unwrap();
            worst = worst.max(res);
        }
    }
    let transform_ok = worst < C8_TRANSFORM_TOL;

    let mut recip_bad = 0;
    let mut pairs = 0;
    while pairs < C8_RECIPROCITY_PAIRS {
        let c = rng.gen_range(1..=5000i64);
        let d = rng.gen_range(1..=5000i64);
        if c.gcd(&d) != 1 {
            continue;
        }
        pairs += 1;
        let lhs = dedekind_sum(d, c).unwrap().value() + dedekind_sum(c, d).unwrap().value();
        let rhs = (Rational::new(d, c) + Rational::new(c, d) + Rational::new(1, c * d)) / 12 - Rational::new(1, 4);
        if lhs != rhs {
            recip_bad += 1;
        }
    }

    let farey_bad: usize = (1..=C8_FAREY_MAX).map(|n| farey_violations(n).unwrap()).sum();

    let xs = [0.1, 0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 29.5, 30.5, 40.0, 60.0, 100.0, 150.0, 200.0];
    let mut bessel_worst = 0.0f64;
    for twice in [-2, -1, 0, 1, 2, 3, 4, 5] {
        for &x in &xs {
            let got = bessel_i(BesselOrder::from_twice(twice), x).unwrap();
            let want = bessel_oracle(twice, x);
            bessel_worst = bessel_worst.max(((got - want) / want).abs());
        }
    }
    let ok = transform_ok && recip_bad == 0 && farey_bad == 0 && bessel_worst < C8_BESSEL_TOL;
    Outcome::new(
        ok,
        format!(
            "{} quotients max residual {worst:.2e}; reciprocity failures {recip_bad}/{pairs}; Farey violations {farey_bad} (N <= {C8_FAREY_MAX}); Bessel max rel err {bessel_worst:.2e}",
            corpus.len()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 8] = [
        ("C1 invariant table for (1,2,10)/(-2,3,-1)", c1, C1_BUDGET),
        ("C2 Bessel arguments per class", c2, C2_BUDGET),
        ("C3 leading asymptotic of g_1(n)", c3, C3_BUDGET),
        ("C4 error bound soundness", c4, C4_BUDGET),
        ("C5 vanishing main term (theta quotient)", c5, C5_BUDGET),
        ("C6 partition numbers by rounding", c6, C6_BUDGET),
        ("C7 error growth classes", c7, Duration::MAX),
        ("C8 transformation and kernel checks", c8, C8_BUDGET),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let ok = outcome.ok && in_time;
        if !ok {
            failed += 1;
        }
        let timing = if budget == Duration::MAX {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!("{} {name} [{timing}]: {}", if ok { "PASS" } else { "FAIL" }, outcome.detail);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
