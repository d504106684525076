//! Command-line front end.
//!
//! Exact values are always emitted as decimal or `p/q` strings. Floating
//! values carry 12 significant digits. Exit codes: 0 success, 1 domain
//! error or failed check, 2 usage error.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;
use serde_json::json;

use crate::bell::{bell_enumerate, bell_eval, ordinary_bell_eval, FnTerms};
use crate::checks::{run_suite, Suite};
use crate::combinatorics::{
    factorial, format_rational, lah, parse_rational, stirling1_unsigned, stirling2, ExactRational,
};
use crate::ensemble::{
    constant_closed_form_distribution, convergence_profile, oscillator_stirling_form,
    DegeneracySpec, Distribution, Ensemble, EnsembleParams,
};
use crate::oracle;
use crate::saddlepoint::gamma_saddle;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "BELLFOWLER_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Csv,
    Json,
}

/// A degeneracy as given on the command line, before any file is read.
#[derive(Debug, Clone, PartialEq)]
pub enum DegeneracyArg {
    Spec(DegeneracySpec),
    File(PathBuf),
}

impl DegeneracyArg {
    pub fn resolve(&self) -> Result<DegeneracySpec, String> {
        match self {
            DegeneracyArg::Spec(s) => Ok(s.clone()),
            DegeneracyArg::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                let is_json = path.extension().is_some_and(|x| x == "json");
                if is_json {
                    DegeneracySpec::from_json(&text)
                } else {
                    DegeneracySpec::from_text(&text)
                }
                .map_err(|e| e.to_string())
            }
        }
    }
}

impl fmt::Display for DegeneracyArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegeneracyArg::Spec(s) => write!(f, "{s}"),
            DegeneracyArg::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Parses `constant[:w]`, `oscillator:D` or `file:PATH`.
pub fn parse_degeneracy(s: &str) -> Result<DegeneracyArg, String> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    match (kind, arg) {
        ("constant", None) => Ok(DegeneracyArg::Spec(DegeneracySpec::constant_one())),
        ("constant", Some(w)) => {
            let w = parse_rational(w).map_err(|e| e.to_string())?;
            if !w.is_positive() {
                return Err("constant degeneracy must be positive".into());
            }
            Ok(DegeneracyArg::Spec(DegeneracySpec::Constant(w)))
        }
        ("oscillator", Some(d)) => match d.parse::<u32>() {
            Ok(d) if d >= 1 => Ok(DegeneracyArg::Spec(DegeneracySpec::Oscillator(d))),
            _ => Err(format!(
                "oscillator dimension must be a positive integer, got `{d}`"
            )),
        },
        ("file", Some(p)) if !p.is_empty() => Ok(DegeneracyArg::File(PathBuf::from(p))),
        _ => Err(format!(
            "expected constant[:w], oscillator:D or file:PATH, got `{s}`"
        )),
    }
}

fn parse_positive_rational(s: &str) -> Result<ExactRational, String> {
    let r = parse_rational(s).map_err(|e| e.to_string())?;
    if !r.is_positive() {
        return Err(format!("`{s}` must be positive"));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "bellfowler",
    version,
    about = "Exact finite-size canonical ensembles via partial Bell polynomials"
)]
pub struct RunRequest {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Exact level distribution P(l) and mean occupations n*(l).
    Dist(DistArgs),
    /// Partial Bell polynomial B(n,k): symbolic form or exact value.
    Bell(BellArgs),
    /// Tables of Lah and Stirling numbers.
    Numbers(NumbersArgs),
    /// Saddle-point approximation of Gamma against the exact value.
    Saddle(SaddleArgs),
    /// Distance between the finite law and the Gibbs limit as K grows.
    Converge(ConvergeArgs),
    /// Run a property suite and print a pass/fail table.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistMethod {
    /// Bell-polynomial recurrence (any degeneracy).
    Bell,
    /// Closed form for constant degeneracy.
    ClosedForm,
    /// Stirling-number sums for oscillator degeneracy.
    Stirling,
    /// Brute-force enumeration (N <= 40).
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct DistArgs {
    /// Number of systems.
    #[arg(long = "K", value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Total energy in quanta.
    #[arg(long = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// constant[:w], oscillator:D or file:PATH.
    #[arg(long, value_parser = parse_degeneracy, default_value = "constant")]
    pub degeneracy: DegeneracyArg,
    #[arg(long, value_enum, default_value_t = DistMethod::Bell)]
    pub method: DistMethod,
    /// Energy quantum, used only for the energy column.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceKind {
    /// a_j = 1
    Ones,
    /// a_j = j!
    Factorial,
    /// a_j = (j-1)!
    ShiftedFactorial,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct BellArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(0..))]
    pub n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(0..))]
    pub k: u64,
    /// Print the monomials instead of a value.
    #[arg(long)]
    pub symbolic: bool,
    /// Argument sequence for evaluation.
    #[arg(long, value_enum, default_value_t = SequenceKind::Ones, conflicts_with = "values")]
    pub at: SequenceKind,
    /// Explicit comma-separated arguments a_1,a_2,... (rationals).
    #[arg(long, value_delimiter = ',', value_parser = parse_rational_arg)]
    pub values: Option<Vec<ExactRational>>,
    /// Evaluate the ordinary Bell polynomial instead.
    #[arg(long, conflicts_with = "symbolic")]
    pub ordinary: bool,
}

fn parse_rational_arg(s: &str) -> Result<ExactRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NumberKind {
    Lah,
    Stirling1,
    Stirling2,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct NumbersArgs {
    #[arg(long, value_enum)]
    pub kind: NumberKind,
    #[arg(long = "max-n", value_parser = clap::value_parser!(u64).range(1..=2000))]
    pub max_n: u64,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SaddleArgs {
    /// Number of systems.
    #[arg(long = "K", value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Mean zero-based level; U*K must be an integer.
    #[arg(long = "U", value_parser = parse_positive_rational)]
    pub u: ExactRational,
    #[arg(long, value_parser = parse_degeneracy, default_value = "constant")]
    pub degeneracy: DegeneracyArg,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ConvergeArgs {
    /// Mean level U = N/K (> 1).
    #[arg(long = "U", value_parser = parse_positive_rational)]
    pub u: ExactRational,
    /// Comma-separated system counts.
    #[arg(long = "K-list", value_delimiter = ',', required = true,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub k_list: Vec<u64>,
    #[arg(long = "l-max", default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub l_max: u64,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
}

/// A rejected command line.
#[derive(Debug)]
pub struct UsageError {
    pub message: String,
    /// `--help` and `--version` also arrive here; they exit 0.
    pub exit_code: i32,
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> UsageError {
    UsageError {
        message: message.into(),
        exit_code: EXIT_USAGE,
    }
}

pub fn parse<I, T>(argv: I) -> Result<RunRequest, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let req = RunRequest::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        let code = match e.kind() {
            ErrorKind::DisplayHelp
            | ErrorKind::DisplayVersion
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                    EXIT_USAGE
                } else {
                    EXIT_OK
                }
            }
            _ => EXIT_USAGE,
        };
        UsageError {
            message: e.render().to_string(),
            exit_code: code,
        }
    })?;
    match &req.command {
        Command::Dist(a) => {
            if a.n < a.k {
                return Err(usage(format!("N = {} must be at least K = {}", a.n, a.k)));
            }
            if !(a.epsilon.is_finite() && a.epsilon > 0.0) {
                return Err(usage("epsilon must be positive"));
            }
        }
        Command::Bell(a) => {
            if a.ordinary && a.symbolic {
                return Err(usage("--ordinary has no symbolic form"));
            }
        }
        Command::Converge(a) if a.u <= BigRational::from_integer(BigInt::from(1)) => {
            return Err(usage("U must exceed 1"));
        }
        _ => {}
    }
    Ok(req)
}

/// Applies `BELLFOWLER_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        usage(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Renders a float with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && !(1e-5..1e12).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn json_float(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(round_sig(x))
    } else {
        serde_json::Value::Null
    }
}

struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

fn csv_writer(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string(value)?;
    writeln!(out, "{s}")?;
    Ok(())
}

/// Executes a parsed request, writing the document to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run(request: &RunRequest, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &request.command {
        Command::Dist(a) => run_dist(a, request.format, out),
        Command::Bell(a) => run_bell(a, request.format, out),
        Command::Numbers(a) => run_numbers(a, request.format, out),
        Command::Saddle(a) => run_saddle(a, request.format, out),
        Command::Converge(a) => run_converge(a, request.format, out),
        Command::Check(a) => run_check(a.suite, request.format, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            if request.format == OutputFormat::Json {
                let _ = write_json(out, &json!({ "error": msg }));
            } else {
                let _ = writeln!(err, "error: {msg}");
            }
            EXIT_DOMAIN
        }
    }
}

/// Parses and runs `argv`; the entry point used by the binary.
pub fn main_with(argv: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let request = match parse(argv) {
        Ok(r) => r,
        Err(e) => {
            let target: &mut dyn Write = if e.exit_code == EXIT_OK { out } else { err };
            let _ = write!(target, "{}", e.message);
            if !e.message.ends_with('\n') {
                let _ = writeln!(target);
            }
            return e.exit_code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return e.exit_code;
    }
    run(&request, out, err)
}

fn compute_distribution(a: &DistArgs) -> Result<Distribution, Failure> {
    let params = EnsembleParams::with_epsilon(a.k as usize, a.n as usize, a.epsilon)?;
    let degeneracy = a.degeneracy.resolve().map_err(Failure)?;
    match a.method {
        DistMethod::Bell => Ok(Ensemble::new(params, degeneracy)?.distribution()?),
        DistMethod::ClosedForm => {
            if !matches!(degeneracy, DegeneracySpec::Constant(_)) {
                return Err(Failure(
                    "closed-form method needs a constant degeneracy".into(),
                ));
            }
            let mut d = constant_closed_form_distribution(&params)?;
            d.degeneracy = degeneracy;
            Ok(d)
        }
        DistMethod::Stirling => {
            let DegeneracySpec::Oscillator(dim) = degeneracy else {
                return Err(Failure(
                    "stirling method needs an oscillator degeneracy".into(),
                ));
            };
            let probs = (1..=params.max_level())
                .map(|l| Ok((l, oscillator_stirling_form(&params, dim, l)?)))
                .collect::<Result<_, Failure>>()?;
            Ok(Distribution {
                params,
                degeneracy,
                probs,
            })
        }
        DistMethod::Oracle => {
            let k = BigRational::from_integer(BigInt::from(params.k()));
            let probs = oracle::occupations_direct(&params, &degeneracy)?
                .into_iter()
                .map(|(l, n)| (l, n / &k))
                .collect();
            Ok(Distribution {
                params,
                degeneracy,
                probs,
            })
        }
    }
}

fn run_dist(a: &DistArgs, format: OutputFormat, out: &mut dyn Write) -> Outcome {
    let dist = compute_distribution(a)?;
    match format {
        OutputFormat::Json => write_json(out, &dist.to_document())?,
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["l", "energy", "p", "n_star"])?;
            for (&l, p) in &dist.probs {
                w.write_record([
                    l.to_string(),
                    format_float(dist.params.energy(l)),
                    format_rational(p),
                    format_rational(&dist.n_star(l)),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Text => {
            writeln!(
                out,
                "K = {}, N = {}, degeneracy {}",
                dist.params.k(),
                dist.params.n(),
                a.degeneracy
            )?;
            writeln!(out, "l\tp\tn_star")?;
            for (&l, p) in &dist.probs {
                writeln!(
                    out,
                    "{l}\t{}\t{}",
                    format_rational(p),
                    format_rational(&dist.n_star(l))
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn run_bell(a: &BellArgs, format: OutputFormat, out: &mut dyn Write) -> Outcome {
    let (n, k) = (a.n as usize, a.k as usize);
    if a.symbolic {
        let b = bell_enumerate(n, k)?;
        match format {
            OutputFormat::Json => write_json(out, &b.to_json())?,
            OutputFormat::Csv => {
                let mut w = csv_writer(out);
                w.write_record(["coefficient", "monomial"])?;
                for m in &b.monomials {
                    let text = m.to_string();
                    let monomial = text.split_once(' ').map(|(_, r)| r).unwrap_or("");
                    w.write_record([m.coefficient.to_string(), monomial.to_string()])?;
                }
                w.flush()?;
            }
            OutputFormat::Text => writeln!(out, "{b}")?,
        }
        return Ok(EXIT_OK);
    }
    let value = match &a.values {
        Some(list) if a.ordinary => ordinary_bell_eval(n, k, list)?,
        Some(list) => bell_eval(n, k, list)?,
        None => {
            let seq = a.at;
            let terms = FnTerms(move |j: usize| {
                BigRational::from_integer(match seq {
                    SequenceKind::Ones => BigInt::from(1),
                    SequenceKind::Factorial => factorial(j),
                    SequenceKind::ShiftedFactorial => factorial(j - 1),
                })
            });
            if a.ordinary {
                ordinary_bell_eval(n, k, &terms)?
            } else {
                bell_eval(n, k, &terms)?
            }
        }
    };
    let value = format_rational(&value);
    match format {
        OutputFormat::Json => write_json(out, &json!({ "n": n, "k": k, "value": value }))?,
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "k", "value"])?;
            w.write_record([n.to_string(), k.to_string(), value])?;
            w.flush()?;
        }
        OutputFormat::Text => writeln!(out, "{value}")?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NumberRow {
    n: usize,
    k: usize,
    label: String,
    value: String,
}

fn run_numbers(a: &NumbersArgs, format: OutputFormat, out: &mut dyn Write) -> Outcome {
    let (prefix, f): (&str, fn(usize, usize) -> BigInt) = match a.kind {
        NumberKind::Lah => ("L", lah),
        NumberKind::Stirling1 => ("S1", stirling1_unsigned),
        NumberKind::Stirling2 => ("S2", stirling2),
    };
    let max_n = a.max_n as usize;
    let rows: Vec<NumberRow> = (1..=max_n)
        .flat_map(|n| (1..=n).map(move |k| (n, k)))
        .map(|(n, k)| NumberRow {
            n,
            k,
            label: format!("{prefix}({n},{k})"),
            value: f(n, k).to_string(),
        })
        .collect();
    match format {
        OutputFormat::Json => write_json(out, &rows)?,
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "k", "label", "value"])?;
            for r in &rows {
                w.write_record([
                    r.n.to_string(),
                    r.k.to_string(),
                    r.label.clone(),
                    r.value.clone(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Text => {
            for r in &rows {
                writeln!(out, "{} = {}", r.label, r.value)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn run_saddle(a: &SaddleArgs, format: OutputFormat, out: &mut dyn Write) -> Outcome {
    let degeneracy = a.degeneracy.resolve().map_err(Failure)?;
    let r = gamma_saddle(a.k as usize, &a.u, &degeneracy)?;
    let exact = r.gamma_exact.as_ref().map(format_rational);
    match format {
        OutputFormat::Json => write_json(
            out,
            &json!({
                "K": r.k,
                "M": r.m,
                "U": format_rational(&a.u),
                "x0": json_float(r.x0),
                "u_at_x0": json_float(r.u_at_x0),
                "u2_at_x0": json_float(r.u2_at_x0),
                "log_gamma_approx": json_float(r.log_gamma_approx),
                "gamma_approx": json_float(r.gamma_approx),
                "gamma_exact": exact,
                "rel_error": r.rel_error.map(json_float),
            }),
        )?,
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record([
                "K",
                "M",
                "U",
                "x0",
                "u_at_x0",
                "u2_at_x0",
                "log_gamma_approx",
                "gamma_approx",
                "gamma_exact",
                "rel_error",
            ])?;
            w.write_record([
                r.k.to_string(),
                r.m.to_string(),
                format_rational(&a.u),
                format_float(r.x0),
                format_float(r.u_at_x0),
                format_float(r.u2_at_x0),
                format_float(r.log_gamma_approx),
                format_float(r.gamma_approx),
                exact.unwrap_or_default(),
                r.rel_error.map(format_float).unwrap_or_default(),
            ])?;
            w.flush()?;
        }
        OutputFormat::Text => {
            writeln!(
                out,
                "K = {}, M = {}, U = {}",
                r.k,
                r.m,
                format_rational(&a.u)
            )?;
            writeln!(out, "x0 = {}", format_float(r.x0))?;
            writeln!(out, "u(x0) = {}", format_float(r.u_at_x0))?;
            writeln!(out, "u''(x0) = {}", format_float(r.u2_at_x0))?;
            writeln!(
                out,
                "ln Gamma (saddle) = {}",
                format_float(r.log_gamma_approx)
            )?;
            writeln!(out, "Gamma (saddle) = {}", format_float(r.gamma_approx))?;
            if let Some(e) = &exact {
                writeln!(out, "Gamma (exact) = {e}")?;
            }
            if let Some(e) = r.rel_error {
                writeln!(out, "relative error = {}", format_float(e))?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn run_converge(a: &ConvergeArgs, format: OutputFormat, out: &mut dyn Write) -> Outcome {
    let ks: Vec<usize> = a.k_list.iter().map(|&k| k as usize).collect();
    let rows = convergence_profile(&a.u, &ks, a.l_max as usize)?;
    match format {
        OutputFormat::Json => write_json(
            out,
            &json!({
                "U": format_rational(&a.u),
                "l_max": a.l_max,
                "rows": rows.iter().map(|r| json!({
                    "K": r.k,
                    "N": r.n,
                    "sup_distance": json_float(r.sup_distance),
                })).collect::<Vec<_>>(),
            }),
        )?,
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["K", "N", "sup_distance"])?;
            for r in &rows {
                w.write_record([
                    r.k.to_string(),
                    r.n.to_string(),
                    format_float(r.sup_distance),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Text => {
            writeln!(out, "K\tN\tsup_distance")?;
            for r in &rows {
                writeln!(out, "{}\t{}\t{}", r.k, r.n, format_float(r.sup_distance))?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Runs one property suite; exit 0 iff every property holds.
fn run_check(suite: Suite, format: OutputFormat, out: &mut dyn Write) -> Outcome {
    let outcomes = run_suite(suite);
    let all = outcomes.iter().all(|o| o.passed);
    match format {
        OutputFormat::Json => write_json(
            out,
            &json!({ "suite": suite, "passed": all, "properties": outcomes }),
        )?,
        OutputFormat::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["property", "status", "detail"])?;
            for o in &outcomes {
                w.write_record([
                    o.property.as_str(),
                    if o.passed { "PASS" } else { "FAIL" },
                    o.detail.as_str(),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Text => {
            for o in &outcomes {
                writeln!(
                    out,
                    "{}  {}  ({})",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.property,
                    o.detail
                )?;
            }
        }
    }
    Ok(if all { EXIT_OK } else { EXIT_DOMAIN })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("bellfowler".to_string())
            .chain(s.split_whitespace().map(String::from))
            .collect()
    }

    #[test]
    fn parses_dist() {
        let r = parse(argv("dist --K 2 --N 3 --degeneracy constant --format json")).unwrap();
        assert_eq!(r.format, OutputFormat::Json);
        match r.command {
            Command::Dist(a) => {
                assert_eq!((a.k, a.n), (2, 3));
                assert_eq!(
                    a.degeneracy,
                    DegeneracyArg::Spec(DegeneracySpec::constant_one())
                );
                assert_eq!(a.method, DistMethod::Bell);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parses_bell() {
        let r = parse(argv("bell --n 6 --k 3 --symbolic")).unwrap();
        assert!(matches!(
            r.command,
            Command::Bell(BellArgs {
                n: 6,
                k: 3,
                symbolic: true,
                ..
            })
        ));
        let r = parse(argv("bell --n 3 --k 2 --values 1/2,3")).unwrap();
        let Command::Bell(a) = r.command else {
            panic!()
        };
        assert_eq!(a.values.unwrap().len(), 2);
    }

    #[test]
    fn usage_errors() {
        for bad in [
            "dist --K 0 --N 3",
            "dist --K 3 --N 2",
            "dist --K 2 --N 3 --degeneracy quartic",
            "dist --K 2 --N 3 --degeneracy oscillator:0",
            "dist --K 2 --N 3 --bogus",
            "numbers --kind lah",
            "converge --U 1 --K-list 5",
            "frobnicate",
            "",
        ] {
            let e = parse(argv(bad)).unwrap_err();
            assert_eq!(e.exit_code, EXIT_USAGE, "{bad}");
        }
        assert_eq!(parse(argv("--help")).unwrap_err().exit_code, EXIT_OK);
    }

    #[test]
    fn degeneracy_forms() {
        assert_eq!(
            parse_degeneracy("constant:3/2").unwrap(),
            DegeneracyArg::Spec(DegeneracySpec::Constant(BigRational::new(
                3.into(),
                2.into()
            )))
        );
        assert_eq!(
            parse_degeneracy("oscillator:3").unwrap(),
            DegeneracyArg::Spec(DegeneracySpec::Oscillator(3))
        );
        assert_eq!(
            parse_degeneracy("file:/tmp/x").unwrap(),
            DegeneracyArg::File("/tmp/x".into())
        );
        assert!(parse_degeneracy("constant:-1").is_err());
        assert!(parse_degeneracy("file:").is_err());
    }

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_float(1e300), "1e300");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(123456.0), "123456");
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(round_sig(1.0 / 7.0), 0.142857142857);
    }
}
