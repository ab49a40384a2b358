//! Command-line driver.
//!
//! Every command writes one record per row, either as CSV (header plus one
//! line per row) or as line-delimited JSON. Each record starts with the
//! command name and repeats the parameters that produced it, so a row can be
//! reproduced on its own. The worker count is never printed: output is
//! byte-identical for any `--workers`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, ExactRatio};
use crate::experiments::{self, EstimateResult};
use crate::rule::{threshold_from_alpha, Threshold};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "stoprule",
    version,
    about = "Adjacent-pair secretary stopping rule"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write rows to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ThresholdArgs {
    /// First checked stop position.
    #[arg(long)]
    pub r: Option<usize>,
    /// Rejected fraction; r = floor(alpha * n).
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl ThresholdArgs {
    fn resolve(&self, n: usize) -> Result<Threshold> {
        match (self.r, self.alpha) {
            (Some(r), None) => Threshold::new(n, r),
            (None, Some(alpha)) => threshold_from_alpha(n, alpha),
            _ => Err(Error::Parameter(
                "give exactly one of --r and --alpha".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct WorkerArgs {
    /// Worker threads; defaults to every available core.
    #[arg(long, env = "STOPRULE_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form counts and probabilities for one threshold.
    Formula {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exhaustive tallies over all n! interview orders.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// Lift the enumeration size guard.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        workers: WorkerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare enumeration with the closed forms; exit 1 on any mismatch.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        workers: WorkerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo estimate of the success probability.
    Simulate {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        workers: WorkerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One Monte Carlo estimate per alpha.
    Sweep {
        #[arg(long)]
        n: usize,
        /// `start:end:step` (inclusive) or a comma-separated list.
        #[arg(long)]
        alphas: String,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        workers: WorkerArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Permutations of 1..n without successions.
    A002464 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Threshold maximizing the exact success probability.
    Optimal {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Formula { .. } => "formula",
            Command::Enumerate { .. } => "enumerate",
            Command::Verify { .. } => "verify",
            Command::Simulate { .. } => "simulate",
            Command::Sweep { .. } => "sweep",
            Command::A002464 { .. } => "a002464",
            Command::Optimal { .. } => "optimal",
        }
    }

    fn output(&self) -> &OutputArgs {
        match self {
            Command::Formula { output, .. }
            | Command::Enumerate { output, .. }
            | Command::Verify { output, .. }
            | Command::Simulate { output, .. }
            | Command::Sweep { output, .. }
            | Command::A002464 { output, .. }
            | Command::Optimal { output, .. } => output,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaRecord {
    pub command: String,
    pub n: usize,
    pub r: usize,
    pub alpha: Option<f64>,
    pub lambda_count: String,
    pub lambda_ratio: String,
    pub lambda_ratio_decimal: f64,
    pub pi_count: String,
    pub success_exact: String,
    pub success_decimal: f64,
    /// `r / n`, the fraction fed to the limiting curve.
    pub asymptotic_alpha: f64,
    pub asymptotic_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateRecord {
    pub command: String,
    pub n: usize,
    pub r: usize,
    pub total: String,
    /// `k:count` pairs separated by `;`.
    pub per_k_lambda: String,
    pub lambda_total: String,
    pub pi_count: String,
    pub lambda_minus_pi: String,
    pub edge_success: String,
    pub edge_wrap: String,
    pub prefix_only_fail: String,
    pub no_stop: String,
    pub rule_success: String,
    pub rule_success_fraction: String,
    pub edge_fraction: String,
    pub reconciliation_mismatches: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub command: String,
    pub n: usize,
    pub r: usize,
    pub quantity: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

/// Row of `simulate` and `sweep`. Result fields are empty on an error row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub command: String,
    pub n: usize,
    pub alpha: Option<f64>,
    pub r: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    pub p_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
    pub success_exact: Option<String>,
    pub success_exact_decimal: Option<f64>,
    pub success_adjacent: Option<u64>,
    pub fail_wraparound: Option<u64>,
    pub fail_prefix_only: Option<u64>,
    pub fail_no_stop: Option<u64>,
    pub edge_success: Option<u64>,
    pub edge_stops: Option<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A002464Record {
    pub command: String,
    pub n: usize,
    pub count: String,
    /// `count/n!`, unreduced.
    pub fraction: String,
    pub fraction_decimal: f64,
    pub limit: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalRecord {
    pub command: String,
    pub n: usize,
    pub r_star: usize,
    pub alpha_star: f64,
    pub p_star: String,
    pub p_star_decimal: f64,
    pub asymptotic_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub command: String,
    pub error: String,
    pub message: String,
}

/// Rounds to 15 significant digits.
pub fn sig15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Parses `start:end:step` (inclusive) or `a,b,c`.
pub fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parameter(format!("cannot parse alpha list {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, end, step] => {
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if step.is_nan() || step <= 0.0 || end < start {
                return Err(bad());
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::GuardExceeded { .. } => "guard_exceeded",
        Error::ThresholdOutOfRange { .. }
        | Error::AlphaOutOfWindow { .. }
        | Error::InvalidAlpha(_) => "threshold",
        Error::Parameter(_) | Error::TooFewApplicants(_) => "parameter",
        _ => "domain",
    }
}

struct Sink {
    format: Format,
    csv: Option<csv::Writer<Box<dyn Write>>>,
    raw: Option<Box<dyn Write>>,
}

impl Sink {
    fn new(format: Format, out: Box<dyn Write>) -> Self {
        match format {
            Format::Csv => Sink {
                format,
                csv: Some(csv::WriterBuilder::new().has_headers(true).from_writer(out)),
                raw: None,
            },
            Format::Json => Sink {
                format,
                csv: None,
                raw: Some(out),
            },
        }
    }

    fn emit<T: Serialize>(&mut self, rec: &T) -> io::Result<()> {
        match self.format {
            Format::Csv => self
                .csv
                .as_mut()
                .unwrap()
                .serialize(rec)
                .map_err(io::Error::other),
            Format::Json => {
                let w = self.raw.as_mut().unwrap();
                serde_json::to_writer(&mut *w, rec)?;
                w.write_all(b"\n")
            }
        }
    }

    fn finish(self) -> io::Result<()> {
        match (self.csv, self.raw) {
            (Some(mut c), _) => c.flush(),
            (_, Some(mut w)) => w.flush(),
            _ => Ok(()),
        }
    }
}

fn estimate_record(
    command: &str,
    n: usize,
    alpha: Option<f64>,
    trials: u64,
    seed: u64,
    outcome: Result<EstimateResult>,
) -> EstimateRecord {
    let mut rec = EstimateRecord {
        command: command.into(),
        n,
        alpha,
        r: None,
        trials,
        seed,
        p_hat: None,
        stderr: None,
        ci95_low: None,
        ci95_high: None,
        success_exact: None,
        success_exact_decimal: None,
        success_adjacent: None,
        fail_wraparound: None,
        fail_prefix_only: None,
        fail_no_stop: None,
        edge_success: None,
        edge_stops: None,
        error: None,
    };
    match outcome {
        Ok(res) => {
            let exact = exact::success_probability_exact(n as u64, res.r as u64).ok();
            rec.r = Some(res.r);
            rec.p_hat = Some(sig15(res.p_hat));
            rec.stderr = Some(sig15(res.stderr));
            rec.ci95_low = Some(sig15(res.ci95.0));
            rec.ci95_high = Some(sig15(res.ci95.1));
            rec.success_exact_decimal = exact.as_ref().map(|p| sig15(p.to_f64()));
            rec.success_exact = exact.map(|p| p.to_string());
            let t = res.tallies;
            rec.success_adjacent = Some(t.success_adjacent);
            rec.fail_wraparound = Some(t.fail_wraparound);
            rec.fail_prefix_only = Some(t.fail_prefix_only);
            rec.fail_no_stop = Some(t.fail_no_stop);
            rec.edge_success = Some(t.edge_success);
            rec.edge_stops = Some(t.edge_stops);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Executes one parsed command. Returns the process exit status: 0 on
/// success, 1 when a verification fails.
fn execute(cmd: &Command, sink: &mut Sink, diag: &mut dyn Write) -> Result<i32> {
    let name = cmd.name().to_string();
    let io_err = |e: io::Error| Error::Parameter(format!("write failed: {e}"));
    match cmd {
        Command::Formula { n, threshold, .. } => {
            let t = threshold.resolve(*n)?;
            let (n64, r64) = (t.n() as u64, t.r() as u64);
            let lambda = exact::lambda_ratio(n64, r64)?;
            let success = exact::success_probability_exact(n64, r64)?;
            let asym_alpha = t.r() as f64 / t.n() as f64;
            sink.emit(&FormulaRecord {
                command: name,
                n: t.n(),
                r: t.r(),
                alpha: threshold.alpha,
                lambda_count: exact::count_lambda(n64, r64)?.to_string(),
                lambda_ratio_decimal: sig15(lambda.to_f64()),
                lambda_ratio: lambda.to_string(),
                pi_count: exact::pi_count(n64, r64)?.to_string(),
                success_decimal: sig15(success.to_f64()),
                success_exact: success.to_string(),
                asymptotic_alpha: sig15(asym_alpha),
                asymptotic_success: sig15(exact::asymptotic_success(asym_alpha)),
            })
            .map_err(io_err)?;
        }
        Command::Enumerate {
            n,
            r,
            force,
            workers,
            ..
        } => {
            let rep = experiments::enumerate_counts(*n, *r, *force, workers.workers)?;
            let per_k = rep
                .per_k_lambda
                .iter()
                .map(|(k, c)| format!("{k}:{c}"))
                .collect::<Vec<_>>()
                .join(";");
            sink.emit(&EnumerateRecord {
                command: name,
                n: rep.n,
                r: rep.r,
                total: rep.total.to_string(),
                per_k_lambda: per_k,
                lambda_total: rep.lambda_total.to_string(),
                pi_count: rep.pi_count.to_string(),
                lambda_minus_pi: rep.lambda_minus_pi().to_string(),
                edge_success: rep.edge_success_count.to_string(),
                edge_wrap: rep.edge_wrap_count.to_string(),
                prefix_only_fail: rep.prefix_only_fail_count.to_string(),
                no_stop: rep.no_stop_count.to_string(),
                rule_success: rep.rule_success_count.to_string(),
                rule_success_fraction: rep.rule_success_fraction().to_string(),
                edge_fraction: rep.edge_fraction().to_string(),
                reconciliation_mismatches: rep.reconciliation_mismatches.to_string(),
            })
            .map_err(io_err)?;
        }
        Command::Verify {
            n,
            r,
            force,
            workers,
            ..
        } => {
            let rep = experiments::verify_against_exact(*n, *r, *force, workers.workers)?;
            for c in &rep.checks {
                sink.emit(&VerifyRecord {
                    command: name.clone(),
                    n: rep.n,
                    r: rep.r,
                    quantity: c.quantity.clone(),
                    expected: c.expected.clone(),
                    actual: c.actual.clone(),
                    pass: c.pass,
                })
                .map_err(io_err)?;
            }
            match rep.first_divergence() {
                None => {
                    let _ = writeln!(diag, "all counts match");
                }
                Some(c) => {
                    let _ = writeln!(
                        diag,
                        "mismatch in {}: expected {}, got {}",
                        c.quantity, c.expected, c.actual
                    );
                    return Ok(1);
                }
            }
        }
        Command::Simulate {
            n,
            threshold,
            trials,
            seed,
            workers,
            ..
        } => {
            let t = threshold.resolve(*n)?;
            let res = experiments::estimate(t.n(), t.r(), *trials, *seed, workers.workers)?;
            sink.emit(&estimate_record(
                &name,
                *n,
                threshold.alpha,
                *trials,
                *seed,
                Ok(res),
            ))
            .map_err(io_err)?;
        }
        Command::Sweep {
            n,
            alphas,
            trials,
            seed,
            workers,
            ..
        } => {
            let alphas = parse_alphas(alphas)?;
            for row in experiments::sweep(*n, &alphas, *trials, *seed, workers.workers) {
                sink.emit(&estimate_record(
                    &name,
                    *n,
                    Some(row.alpha),
                    *trials,
                    *seed,
                    row.outcome,
                ))
                .map_err(io_err)?;
            }
        }
        Command::A002464 { n, force, .. } => {
            let count = experiments::a002464_count(*n, *force)?;
            let fact = exact::omega_size(*n as u64);
            let frac = ExactRatio::from(num_rational::BigRational::new(
                count.0.clone().into(),
                fact.0.clone().into(),
            ))
            .to_f64();
            let limit = (-2.0f64).exp();
            sink.emit(&A002464Record {
                command: name,
                n: *n,
                count: count.to_string(),
                fraction: format!("{count}/{fact}"),
                fraction_decimal: sig15(frac),
                limit: sig15(limit),
                deviation: sig15(frac - limit),
            })
            .map_err(io_err)?;
        }
        Command::Optimal { n, .. } => {
            let (r, p) = exact::optimal_threshold(*n as u64)?;
            sink.emit(&OptimalRecord {
                command: name,
                n: *n,
                r_star: r as usize,
                alpha_star: sig15(r as f64 / *n as f64),
                p_star_decimal: sig15(p.to_f64()),
                p_star: p.to_string(),
                asymptotic_limit: 0.5,
            })
            .map_err(io_err)?;
        }
    }
    Ok(0)
}

/// Parses `args` and runs the command. Rows go to `--out` or `stdout`;
/// diagnostics and error objects go to `stderr`. Returns the exit status.
pub fn run<I, T>(args: I, stdout: Box<dyn Write>, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let cmd = &cli.command;
    let out: Box<dyn Write> = match &cmd.output().out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                report_error(
                    stderr,
                    cmd.name(),
                    "io",
                    &format!("{}: {e}", path.display()),
                );
                return 2;
            }
        },
        None => stdout,
    };
    let mut sink = Sink::new(cmd.output().format, out);
    let status = match execute(cmd, &mut sink, stderr) {
        Ok(status) => status,
        Err(e) => {
            report_error(stderr, cmd.name(), error_kind(&e), &e.to_string());
            return 2;
        }
    };
    if let Err(e) = sink.finish() {
        report_error(stderr, cmd.name(), "io", &e.to_string());
        return 2;
    }
    status
}

fn report_error(stderr: &mut dyn Write, command: &str, kind: &str, message: &str) {
    let rec = ErrorRecord {
        command: command.into(),
        error: kind.into(),
        message: message.into(),
    };
    let _ = serde_json::to_writer(&mut *stderr, &rec);
    let _ = writeln!(stderr);
}
