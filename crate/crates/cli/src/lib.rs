//! `etaq` command-line front end.
//!
//! Exit codes: 0 ok, 2 usage, 3 hypothesis violated, 4 error bound violated,
//! 5 verification failure.

pub mod spec;

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etaq_core::asymptotic::Branch;
use etaq_core::verify::run_verification;
use etaq_core::{expand, invariants, AsymptoticEstimate, Error, EtaQuotient, Evaluator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

pub use spec::{QuotientSpec, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_BOUND: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// Highest Farey order checked by `verify`.
pub const FAREY_MAX: u64 = 50;

#[derive(Debug, Parser)]
#[command(name = "etaq", version, about = "Exact and asymptotic Fourier coefficients of eta-quotients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact coefficients g(0..=upto).
    Coeffs {
        #[command(flatten)]
        quotient: QuotientArgs,
        #[arg(long)]
        upto: i64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Asymptotic estimate of g(n) with its per-shell breakdown.
    Estimate {
        #[command(flatten)]
        quotient: QuotientArgs,
        #[arg(long)]
        n: i64,
        /// Truncation of the convergent series (Delta_1 > 0 only).
        #[arg(long)]
        kmax: Option<i64>,
        /// Also compute g(n) exactly.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exact against asymptotic over n in [from, to].
    Compare {
        #[command(flatten)]
        quotient: QuotientArgs,
        #[arg(long)]
        from: i64,
        #[arg(long)]
        to: i64,
        #[arg(long)]
        kmax: Option<i64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Structural invariants and the admissibility condition.
    Check {
        #[command(flatten)]
        quotient: QuotientArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Seeded numerical checks of the transformation law, Farey arcs and bound lemmas.
    Verify {
        #[command(flatten)]
        quotient: QuotientArgs,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct QuotientArgs {
    /// Quotient as "m1:d1,m2:d2,...", e.g. "1:-2,2:3,10:-1".
    #[arg(allow_hyphen_values = true)]
    pub spec: Option<String>,
    /// Comma-separated m_r (with --delta instead of SPEC).
    #[arg(long = "m")]
    pub m: Option<String>,
    /// Comma-separated delta_r (with --m instead of SPEC).
    #[arg(long = "delta", allow_hyphen_values = true)]
    pub delta: Option<String>,
}

impl QuotientArgs {
    pub fn resolve(&self) -> Result<EtaQuotient, Failure> {
        let spec = match (&self.spec, &self.m, &self.delta) {
            (Some(s), None, None) => s.parse::<QuotientSpec>(),
            (None, Some(m), Some(d)) => QuotientSpec::from_lists(m, d),
            (Some(_), _, _) => return Err(Failure::usage("give either SPEC or --m/--delta, not both")),
            _ => return Err(Failure::usage("missing quotient: give SPEC or both --m and --delta")),
        };
        spec.map(QuotientSpec::into_quotient).map_err(|e| Failure::usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// An error message with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Hypothesis(_) => EXIT_HYPOTHESIS,
            Error::NotReal { .. } => EXIT_VERIFY,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: format!("write failed: {e}") }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure { code: 1, message: format!("write failed: {e}") }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: 1, message: format!("write failed: {e}") }
    }
}

/// Caps the global rayon pool at `ETAQ_THREADS` when set.
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("ETAQ_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::usage(format!("ETAQ_THREADS must be a positive integer, got {value:?}")))?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Coeffs { quotient, upto, format } => cmd_coeffs(&quotient.resolve()?, *upto, *format, out),
        Command::Estimate { quotient, n, kmax, exact, format } => {
            cmd_estimate(&quotient.resolve()?, *n, *kmax, *exact, *format, out)
        }
        Command::Compare { quotient, from, to, kmax, format } => {
            cmd_compare(&quotient.resolve()?, *from, *to, *kmax, *format, out)
        }
        Command::Check { quotient, format } => cmd_check(&quotient.resolve()?, *format, out),
        Command::Verify { quotient, samples, seed, format } => {
            cmd_verify(&quotient.resolve()?, *samples, *seed, *format, out)
        }
    }
}

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn unsupported(format: Format, command: &str) -> Failure {
    Failure::usage(format!("{command} does not support --format {}", format.to_possible_value().unwrap().get_name()))
}

/// `x` rounded to `digits` decimals, in positional notation.
pub fn fixed(x: &Float, digits: u32) -> String {
    let scale = Integer::from(Integer::u_pow_u(10, digits));
    let scaled = Float::with_val(x.prec().max(64) + 4 * digits + 8, x * &scale);
    let v = scaled.round().to_integer().unwrap_or_default();
    let negative = v < 0;
    let mut body = v.abs().to_string();
    let digits = digits as usize;
    if digits == 0 {
        return if negative && body != "0" { format!("-{body}") } else { body };
    }
    if body.len() <= digits {
        body = format!("{}{body}", "0".repeat(digits + 1 - body.len()));
    }
    let (int, frac) = body.split_at(body.len() - digits);
    let sign = if negative { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}

fn rational_string(r: &rug::Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn small_rational_string(r: etaq_core::Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub n: usize,
    pub g: String,
}

pub fn cmd_coeffs(eq: &EtaQuotient, upto: i64, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let series = expand(eq, upto)?;
    match format {
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "g"])?;
            for (n, g) in series.coeffs().iter().enumerate() {
                w.write_record([n.to_string(), g.to_string()])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let rows: Vec<CoeffRow> =
                series.coeffs().iter().enumerate().map(|(n, g)| CoeffRow { n, g: g.to_string() }).collect();
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Format::Text => return Err(unsupported(format, "coeffs")),
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionOut {
    pub residue: u64,
    pub k: u64,
    pub bessel_arg: f64,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOut {
    pub spec: String,
    pub n: i64,
    pub branch: String,
    pub trunc_n: u64,
    pub main_total: String,
    pub rounded: String,
    pub imag_ratio: f64,
    pub error_bound: Option<f64>,
    pub remainder_indicator: Option<f64>,
    pub exact: Option<String>,
    pub abs_diff: Option<String>,
    pub within_bound: Option<bool>,
    pub contributions: Vec<ContributionOut>,
}

/// Decimals printed for real values.
const DIGITS: u32 = 6;

impl EstimateOut {
    pub fn new(eq: &EtaQuotient, est: &AsymptoticEstimate) -> Self {
        EstimateOut {
            spec: eq.to_string(),
            n: est.n,
            branch: est.branch.as_str().to_string(),
            trunc_n: est.trunc_n,
            main_total: fixed(&est.main_total, DIGITS),
            rounded: est.rounded().to_string(),
            imag_ratio: est.imag_ratio,
            error_bound: est.error_bound,
            remainder_indicator: est.remainder_indicator,
            exact: est.exact.as_ref().map(Integer::to_string),
            abs_diff: est.deviation().map(|d| fixed(&d.abs(), DIGITS)),
            within_bound: est.within_bound(),
            contributions: est
                .contributions
                .iter()
                .map(|c| ContributionOut {
                    residue: c.residue,
                    k: c.k,
                    bessel_arg: c.bessel_arg,
                    value: fixed(&c.value, DIGITS),
                })
                .collect(),
        }
    }
}

pub fn cmd_estimate(
    eq: &EtaQuotient,
    n: i64,
    kmax: Option<i64>,
    exact: bool,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if format != Format::Json {
        return Err(unsupported(format, "estimate"));
    }
    let mut est = Evaluator::new(eq).estimate(n, kmax)?;
    if exact {
        let series = expand(eq, n)?;
        est = est.with_exact(series.coeffs()[n as usize].clone());
    }
    serde_json::to_writer_pretty(&mut *out, &EstimateOut::new(eq, &est))?;
    writeln!(out)?;
    Ok(if est.within_bound() == Some(false) { EXIT_BOUND } else { EXIT_OK })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: i64,
    pub exact: String,
    pub main_total: String,
    pub error_bound: Option<f64>,
    pub abs_diff: String,
    /// `g(n)` over the shell with the largest Bessel argument.
    pub ratio: Option<f64>,
}

impl ComparisonRow {
    fn new(est: &AsymptoticEstimate) -> Self {
        let g = est.exact.as_ref().expect("exact attached");
        let ratio = est.leading().filter(|c| !c.value.is_zero()).map(|c| {
            let prec = c.value.prec().max(64);
            (Float::with_val(prec, g) / &c.value).to_f64()
        });
        ComparisonRow {
            n: est.n,
            exact: g.to_string(),
            main_total: fixed(&est.main_total, DIGITS),
            error_bound: est.error_bound,
            abs_diff: fixed(&est.deviation().unwrap().abs(), DIGITS),
            ratio,
        }
    }
}

/// Estimates with exact coefficients attached for every `n` in `from..=to`.
pub fn comparison(eq: &EtaQuotient, from: i64, to: i64, kmax: Option<i64>) -> Result<Vec<AsymptoticEstimate>, Failure> {
    if from > to {
        return Err(Failure::usage(format!("empty range: --from {from} is greater than --to {to}")));
    }
    if from < 0 {
        return Err(Failure::usage(format!("--from must be non-negative, got {from}")));
    }
    let series = expand(eq, to)?;
    let mut ev = Evaluator::new(eq);
    (from..=to)
        .map(|n| Ok(ev.estimate(n, kmax)?.with_exact(series.coeffs()[n as usize].clone())))
        .collect()
}

pub fn cmd_compare(
    eq: &EtaQuotient,
    from: i64,
    to: i64,
    kmax: Option<i64>,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    if format == Format::Text {
        return Err(unsupported(format, "compare"));
    }
    let estimates = comparison(eq, from, to, kmax)?;
    let rows: Vec<ComparisonRow> = estimates.iter().map(ComparisonRow::new).collect();
    match format {
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "exact", "main_total", "error_bound", "abs_diff", "ratio"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    r.exact.clone(),
                    r.main_total.clone(),
                    r.error_bound.map(|b| format!("{b:e}")).unwrap_or_default(),
                    r.abs_diff.clone(),
                    r.ratio.map(|x| format!("{x:.12}")).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        _ => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
    }
    let violated = estimates.iter().any(|e| e.branch == Branch::MainTheorem && e.within_bound() == Some(false));
    Ok(if violated { EXIT_BOUND } else { EXIT_OK })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassOut {
    pub residue: u64,
    pub delta3: String,
    pub delta4_sq: String,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationOut {
    pub residue: u64,
    pub factor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOut {
    pub spec: String,
    pub delta1: String,
    pub delta2: i64,
    pub big_l: u64,
    pub branch: String,
    pub l_pos: Vec<u64>,
    pub l_nonpos: Vec<u64>,
    pub classes: Vec<ClassOut>,
    pub admissible: bool,
    pub violations: Vec<ViolationOut>,
}

pub fn check_report(eq: &EtaQuotient) -> CheckOut {
    let inv = invariants(eq);
    let report = etaq_core::check_admissible(eq);
    let branch = if eq.delta1().twice() <= 0 { Branch::MainTheorem } else { Branch::Sussman };
    CheckOut {
        spec: eq.to_string(),
        delta1: eq.delta1().to_string(),
        delta2: eq.delta2(),
        big_l: eq.big_l(),
        branch: branch.as_str().to_string(),
        l_pos: inv.l_pos.clone(),
        l_nonpos: inv.l_nonpos.clone(),
        classes: inv
            .residues()
            .map(|l| ClassOut {
                residue: l,
                delta3: small_rational_string(inv.delta3(l)),
                delta4_sq: rational_string(inv.delta4_sq(l)),
                positive: inv.is_positive_class(l),
            })
            .collect(),
        admissible: report.ok,
        violations: report.violations.iter().map(|&(residue, factor)| ViolationOut { residue, factor }).collect(),
    }
}

fn list(v: &[u64]) -> String {
    let items: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("{{{}}}", items.join(","))
}

pub fn cmd_check(eq: &EtaQuotient, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let rep = check_report(eq);
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rep)?;
            writeln!(out)?;
        }
        Format::Text => {
            writeln!(out, "quotient   {}", rep.spec)?;
            writeln!(out, "Delta_1    {}", rep.delta1)?;
            writeln!(out, "Delta_2    {}", rep.delta2)?;
            writeln!(out, "L          {}", rep.big_l)?;
            writeln!(out, "branch     {}", rep.branch)?;
            writeln!(out, "L>0        {}", list(&rep.l_pos))?;
            writeln!(out, "L<=0       {}", list(&rep.l_nonpos))?;
            writeln!(out, "l  Delta_3  Delta_4^2")?;
            for c in &rep.classes {
                writeln!(out, "{}  {}  {}", c.residue, c.delta3, c.delta4_sq)?;
            }
            if rep.admissible {
                writeln!(out, "admissible yes")?;
            } else {
                for v in &rep.violations {
                    writeln!(out, "admissible no: residue {} fails for factor {}", v.residue, v.factor)?;
                }
            }
        }
        Format::Csv => return Err(unsupported(format, "check")),
    }
    Ok(if rep.admissible { EXIT_OK } else { EXIT_HYPOTHESIS })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOut {
    pub spec: String,
    pub seed: u64,
    pub samples: usize,
    pub max_transform_residual: f64,
    pub transform_failures: usize,
    pub min_bound_margin: f64,
    pub bound_failures: usize,
    pub farey_orders_checked: u64,
    pub farey_failures: usize,
    pub passed: bool,
}

pub fn verify_report(eq: &EtaQuotient, samples: usize, seed: u64) -> Result<VerifyOut, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = run_verification(eq, samples, FAREY_MAX, &mut rng)?;
    Ok(VerifyOut {
        spec: eq.to_string(),
        seed,
        samples,
        max_transform_residual: r.max_transform_residual,
        transform_failures: r.transform_failures,
        min_bound_margin: r.min_bound_margin,
        bound_failures: r.bound_failures,
        farey_orders_checked: r.farey_orders_checked,
        farey_failures: r.farey_failures,
        passed: r.passed(),
    })
}

pub fn cmd_verify(eq: &EtaQuotient, samples: usize, seed: u64, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let rep = verify_report(eq, samples, seed)?;
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rep)?;
            writeln!(out)?;
        }
        Format::Text => {
            writeln!(out, "quotient            {}", rep.spec)?;
            writeln!(out, "seed                {}", rep.seed)?;
            writeln!(out, "samples             {}", rep.samples)?;
            writeln!(out, "transform residual  max {:.3e}, {} over tolerance", rep.max_transform_residual, rep.transform_failures)?;
            writeln!(out, "bound margins       min {:.3e}, {} failing", rep.min_bound_margin, rep.bound_failures)?;
            writeln!(out, "Farey orders 1..{}  {} failing", rep.farey_orders_checked, rep.farey_failures)?;
            writeln!(out, "{}", if rep.passed { "PASS" } else { "FAIL" })?;
        }
        Format::Csv => return Err(unsupported(format, "verify")),
    }
    Ok(if rep.passed { EXIT_OK } else { EXIT_VERIFY })
}
