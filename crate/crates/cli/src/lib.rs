//! The `lmoment` command line.
//!
//! Every subcommand writes one JSON report (schema `lmoment/1`) with the
//! fields `schema_version`, `command`, `inputs`, `outputs`, `certificates`
//! and `runtime_ms`. Tabular commands can write CSV instead.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 failed numerical
//! certificate.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

mod commands;

pub const SCHEMA_VERSION: &str = "lmoment/1";

/// Spectral parameter assumed for mock systems when no data file is given.
pub const DEFAULT_T_F: f64 = 13.779_751_351_890_743;
/// Prime range assumed for mock systems when no data file is given.
pub const DEFAULT_PMAX: u64 = 125_000;

#[derive(Parser, Debug)]
#[command(name = "lmoment", version, about = "Twisted first moments of L-functions, numerically")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Hecke eigenvalue file.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    /// Overrides the pass threshold of every certificate of the command.
    #[arg(long, global = true, value_parser = positive)]
    pub tol: Option<f64>,
    /// Replace the eigenvalues by a seeded random mock system.
    #[arg(long, global = true)]
    pub mock: bool,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s}")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Character census and an orthogonality spot check.
    Chars {
        #[arg(long)]
        q: u64,
    },
    /// All Gauss sums with their norm and pairing residuals.
    Gauss {
        #[arg(long)]
        q: u64,
    },
    /// Kloosterman sums S(a, b; q) for 1 <= a, b < q with Weil-bound margins.
    Kloosterman {
        #[arg(long)]
        q: u64,
    },
    /// One central value, cross-checked by a second route.
    Lvalue {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
        /// L(1/2, f x chi) instead of L(1/2, chi).
        #[arg(long)]
        twist: bool,
    },
    /// The twisted first moment at one prime modulus.
    Moment {
        #[arg(long)]
        q: u64,
    },
    /// Moments for every prime in a range, with trend statistics.
    Scan {
        #[arg(long)]
        qmin: u64,
        #[arg(long)]
        qmax: u64,
    },
    /// Both sides of the Voronoi summation formula.
    Voronoi {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long = "N")]
        n: u64,
    },
    /// Validate an eigenvalue file.
    CheckData,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Chars { .. } => "chars",
            Command::Gauss { .. } => "gauss",
            Command::Kloosterman { .. } => "kloosterman",
            Command::Lvalue { .. } => "lvalue",
            Command::Moment { .. } => "moment",
            Command::Scan { .. } => "scan",
            Command::Voronoi { .. } => "voronoi",
            Command::CheckData => "check-data",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// A failure exits with code 3.
    Certificate,
    /// Reported only.
    Diagnostic,
    /// Expected to fail: the input is a mock system.
    NegativeControl,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub name: String,
    pub kind: CertificateKind,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Certificate {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, kind: CertificateKind, value: f64, limit: f64) -> Self {
        Self { name: name.into(), kind, value, limit, passed: value <= limit }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: &str, kind: CertificateKind, value: f64, limit: f64) -> Self {
        Self { name: name.into(), kind, value, limit, passed: value >= limit }
    }

    pub fn flag(name: &str, kind: CertificateKind, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), kind, value: v, limit: 1.0, passed: ok }
    }
}

/// Rows for CSV output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub inputs: Value,
    pub outputs: Value,
    pub certificates: Vec<Certificate>,
    pub table: Option<Table>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: &'static str,
    command: &'static str,
    inputs: &'a Value,
    outputs: &'a Value,
    certificates: &'a [Certificate],
    runtime_ms: u64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(lmoment::Error),
    Output(String),
}

impl From<lmoment::Error> for CliError {
    fn from(e: lmoment::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output(m) => write!(f, "cannot write report: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use lmoment::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Output(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(
                E::ModulusTooSmall(_)
                | E::CompositeModulus(_)
                | E::NotCoprime { .. }
                | E::PrincipalCharacter
                | E::OddCharacter
                | E::WrongWeightKind(_),
            ) => 1,
            CliError::Core(_) => 2,
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lmoment {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.workers as usize)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = pool.install(|| commands::dispatch(&cli.command, &cli.common))?;
    let runtime_ms = start.elapsed().as_millis() as u64;
    let text = match cli.common.format {
        Format::Json => {
            let env = Envelope {
                schema_version: SCHEMA_VERSION,
                command: cli.command.name(),
                inputs: &outcome.inputs,
                outputs: &outcome.outputs,
                certificates: &outcome.certificates,
                runtime_ms,
            };
            serde_json::to_string_pretty(&env).map_err(|e| CliError::Output(e.to_string()))? + "\n"
        }
        Format::Csv => {
            let table = outcome.table.as_ref().ok_or_else(|| {
                CliError::Usage(format!("csv output is not available for {}", cli.command.name()))
            })?;
            csv_text(table)?
        }
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    for c in outcome.certificates.iter().filter(|c| !c.passed) {
        let note = match c.kind {
            CertificateKind::NegativeControl => "negative-control",
            CertificateKind::Diagnostic => "diagnostic",
            CertificateKind::Certificate => "FAILED",
        };
        eprintln!("lmoment {}: {} = {:e} vs limit {:e} ({note})", cli.command.name(), c.name, c.value, c.limit);
    }
    let failed = outcome.certificates.iter().any(|c| c.kind == CertificateKind::Certificate && !c.passed);
    Ok(if failed { 3 } else { 0 })
}

fn csv_text(table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// The common inputs recorded in every report. The worker count is left out
/// so that reports do not depend on it.
fn common_inputs(c: &Common) -> Value {
    json!({
        "data": c.data.as_ref().map(|p| p.display().to_string()),
        "format": c.format,
        "tol": c.tol,
        "mock": c.mock,
        "seed": if c.mock { Some(c.seed) } else { None },
    })
}
