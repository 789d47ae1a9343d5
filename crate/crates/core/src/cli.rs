//! The `certpred` command line: predicates over point files, error tables,
//! analytic constants and Monte Carlo experiments.
//!
//! Exit codes are 0 on success, 1 for usage errors and 2 for bad input data.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::bounds::{AnalyticConstants, Domain, TailBound, TailShape};
use crate::dim::{Dim, PredicateKind, Precision};
use crate::engine::FilterReport;
use crate::mc::{self, ExperimentConfig};
use crate::predicates::{PredicateError, PredicateResult, StaticFilter};

pub const CI_ENV: &str = "CERTPRED_CI";
pub const PREDICATE_SCHEMA: &str = "certpred.predicate.v1";
pub const BOUNDS_SCHEMA: &str = "certpred.bounds.v1";
pub const CONSTANTS_SCHEMA: &str = "certpred.constants.v1";

#[derive(Debug, Parser)]
#[command(name = "certpred", version, about = "Statically filtered exact geometric predicates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a filtered predicate on every line of a point file.
    Predicate(PredicateArgs),
    /// Print the forward error table and static threshold of a predicate.
    Bounds(BoundsArgs),
    /// Print ball volumes, density constants and tail bound coefficients.
    Constants(ConstantsArgs),
    /// Run a Monte Carlo tail or filter experiment.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Test {
    Orientation,
    Insphere,
}

impl From<Test> for PredicateKind {
    fn from(t: Test) -> Self {
        match t {
            Test::Orientation => PredicateKind::Orientation,
            Test::Insphere => PredicateKind::Insphere,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Ball,
    Cube,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Ball => Domain::Ball,
            DomainArg::Cube => Domain::Cube,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Tail,
    Filter,
}

fn parse_dim(s: &str) -> Result<Dim, String> {
    let d: usize = s.parse().map_err(|_| format!("'{s}' is not a dimension"))?;
    Dim::new(d).map_err(|e| e.to_string())
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct PredicateArgs {
    #[arg(long, value_parser = parse_dim)]
    pub dim: Dim,
    #[arg(long, value_enum)]
    pub test: Test,
    #[arg(long, value_parser = parse_precision, default_value = "53")]
    pub precision: Precision,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Point file, one instance per line; standard input if absent or `-`.
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_parser = parse_dim)]
    pub dim: Dim,
    #[arg(long, value_parser = parse_precision, default_value = "53")]
    pub precision: Precision,
    #[arg(long, value_enum, default_value = "insphere")]
    pub test: Test,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_dim)]
    pub dim: Dim,
    #[arg(long, value_enum, default_value = "ball")]
    pub domain: DomainArg,
    #[arg(long, default_value = "1000000", value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Required when CERTPRED_CI=1; otherwise defaults to the clock.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated V values in (0, 1).
    #[arg(long, value_delimiter = ',')]
    pub v_grid: Option<Vec<f64>>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[arg(long, value_enum, default_value = "tail")]
    pub mode: Mode,
    /// Filter precision (filter mode only).
    #[arg(long, value_parser = parse_precision, default_value = "53")]
    pub precision: Precision,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io(_) => 2,
        }
    }
}

/// Runs the command line against the process environment and standard
/// streams, returning the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let ci = std::env::var(CI_ENV).is_ok_and(|v| v == "1");
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let stderr = io::stderr();
    let mut err = stderr.lock();
    run(args, ci, &mut input, &mut out, &mut err)
}

/// Runs the command line with explicit streams. `ci` enforces explicit
/// seeds.
pub fn run<I, T>(args: I, ci: bool, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, ci, stdin, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command, ci: bool, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Predicate(a) => cmd_predicate(a, stdin, out),
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Constants(a) => cmd_constants(a, out),
        Command::Simulate(a) => cmd_simulate(a, ci, out, err),
    }
}

/// Parses a decimal or hexadecimal floating-point literal.
pub fn parse_coordinate(s: &str) -> Option<f64> {
    let lower = s.to_ascii_lowercase();
    let unsigned = lower.trim_start_matches(['+', '-']);
    if unsigned.starts_with("0x") {
        let negative = lower.starts_with('-');
        if lower.len() - unsigned.len() > 1 {
            return None;
        }
        let v = hexf_parse::parse_hexf64(unsigned, false).ok()?;
        Some(if negative { -v } else { v })
    } else {
        s.parse().ok()
    }
}

/// Reads one instance per line. Blank lines and `#` comments are skipped;
/// the line number of each instance is kept for diagnostics.
pub fn read_instances(text: &str, filter: &StaticFilter) -> Result<Vec<(usize, Vec<f64>)>, CliError> {
    let mut instances = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut coords = Vec::new();
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let x = parse_coordinate(tok).ok_or_else(|| CliError::Data(format!("line {n}: cannot parse '{tok}' as a number")))?;
            if !(x.is_finite() && x.abs() <= 1.0) {
                return Err(CliError::Data(format!("line {n}: coordinate {tok} out of [-1,1]")));
            }
            coords.push(x);
        }
        if coords.len() != filter.input_len() {
            return Err(CliError::Data(format!(
                "line {n}: expected {} coordinates ({} points in dimension {}), got {}",
                filter.input_len(),
                filter.kind().arity(filter.dim()),
                filter.dim(),
                coords.len()
            )));
        }
        instances.push((n, coords));
    }
    Ok(instances)
}

fn cmd_predicate(a: &PredicateArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let mut text = String::new();
    match &a.input {
        Some(p) if p.as_os_str() != "-" => {
            text = fs::read_to_string(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        }
        _ => {
            stdin.read_to_string(&mut text)?;
        }
    }
    let filter = StaticFilter::new(a.test.into(), a.dim, a.precision);
    let instances = read_instances(&text, &filter)?;
    let results = instances
        .iter()
        .map(|(n, c)| filter.classify(c).map(|r| (*n, r)))
        .collect::<Result<Vec<(usize, PredicateResult)>, PredicateError>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    match a.format {
        Format::Csv => {
            writeln!(out, "# schema: {PREDICATE_SCHEMA}")?;
            writeln!(out, "line,sign,certificate,float_value,threshold")?;
            for (n, r) in &results {
                writeln!(out, "{n},{},{},{:e},{:e}", r.sign.as_i8(), r.certificate, r.float_value, r.threshold)?;
            }
        }
        Format::Json => {
            let rows: Vec<_> = results
                .iter()
                .map(|(n, r)| {
                    json!({
                        "line": n,
                        "sign": r.sign.as_i8(),
                        "certificate": r.certificate.to_string(),
                        "float_value": r.float_value,
                        "threshold": r.threshold,
                    })
                })
                .collect();
            let doc = json!({
                "schema": PREDICATE_SCHEMA,
                "test": filter.kind(),
                "dim": a.dim,
                "precision": a.precision,
                "results": rows,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
        }
        Format::Text => {
            for (n, r) in &results {
                writeln!(
                    out,
                    "line {n}: sign {:+} ({}) value {:e} threshold {:e}",
                    r.sign.as_i8(),
                    r.certificate,
                    r.float_value,
                    r.threshold
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind: PredicateKind = a.test.into();
    let report = FilterReport::for_predicate(kind, a.dim, a.precision);
    match a.format {
        Format::Text => {
            writeln!(out, "{kind} test, dimension {}, {}-bit mantissa", a.dim, a.precision)?;
            write!(out, "{}", report.to_text())?;
        }
        Format::Json => {
            let doc = json!({ "schema": BOUNDS_SCHEMA, "test": kind, "dim": a.dim, "report": report });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
        }
        Format::Csv => {
            writeln!(out, "# schema: {BOUNDS_SCHEMA}")?;
            writeln!(out, "# threshold={} threshold_f64={:e}", report.threshold, report.threshold_f64)?;
            writeln!(out, "label,description,magnitude,error,reference_magnitude,reference_error,matches")?;
            for r in &report.rows {
                let (rm, re) = match &r.reference {
                    Some(rr) => (rr.mag.to_string(), rr.err.to_string()),
                    None => (String::new(), String::new()),
                };
                let matches = r.matches_reference().map(|m| m.to_string()).unwrap_or_default();
                writeln!(out, "{},{},{},{},{},{},{}", r.label, r.description, r.mag, r.err, rm, re, matches)?;
            }
        }
    }
    Ok(())
}

/// One line of the constants table.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ConstantsRow {
    #[serde(flatten)]
    pub constants: AnalyticConstants,
    pub ball: TailBound,
    pub cube: TailBound,
}

pub fn constants_table() -> Vec<ConstantsRow> {
    Dim::all()
        .map(|d| ConstantsRow {
            constants: AnalyticConstants::new(d),
            ball: TailBound::insphere(d, Domain::Ball),
            cube: TailBound::insphere(d, Domain::Cube),
        })
        .collect()
}

fn shape_cells(b: &TailBound) -> [String; 4] {
    match b.shape {
        TailShape::NearLinear { log_coeff, linear_coeff } => [log_coeff.to_string(), linear_coeff.to_string(), String::new(), String::new()],
        TailShape::Power { coeff, exponent } => [String::new(), String::new(), coeff.to_string(), exponent.to_string()],
    }
}

fn cmd_constants(a: &ConstantsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let table = constants_table();
    match a.format {
        Format::Text => {
            writeln!(out, "{:>2}  {:>8}  {:>10}  {:>12}  {:<32}  {:<32}", "d", "v_d", "sigma_d", "psi_d", "ball bound", "cube bound")?;
            for r in &table {
                let c = &r.constants;
                writeln!(
                    out,
                    "{:>2}  {:>8.4}  {:>10.4}  {:>12.4}  {:<32}  {:<32}",
                    c.dim.get(),
                    c.ball_volume,
                    c.sigma,
                    c.psi,
                    r.ball.to_string(),
                    r.cube.to_string()
                )?;
            }
        }
        Format::Json => {
            let doc = json!({ "schema": CONSTANTS_SCHEMA, "rows": table });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json values serialize"))?;
        }
        Format::Csv => {
            writeln!(out, "# schema: {CONSTANTS_SCHEMA}")?;
            writeln!(
                out,
                "dim,ball_volume,sigma,psi,ball_log,ball_linear,ball_power_coeff,ball_power_exponent,cube_log,cube_linear,cube_power_coeff,cube_power_exponent"
            )?;
            for r in &table {
                let c = &r.constants;
                let [bl, bn, bc, be] = shape_cells(&r.ball);
                let [cl, cn, cc, ce] = shape_cells(&r.cube);
                writeln!(out, "{},{},{},{},{bl},{bn},{bc},{be},{cl},{cn},{cc},{ce}", c.dim, c.ball_volume, c.sigma, c.psi)?;
            }
        }
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs, ci: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if a.format == Format::Text {
        return Err(CliError::Usage("simulate supports --format csv or json".into()));
    }
    let seed = match (a.seed, ci) {
        (Some(s), _) => s,
        (None, true) => return Err(CliError::Usage(format!("--seed is required when {CI_ENV}=1"))),
        (None, false) => {
            let s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0);
            writeln!(err, "seed: {s}")?;
            s
        }
    };
    let mut cfg = ExperimentConfig::new(a.dim, a.domain.into(), a.samples, seed);
    if let Some(grid) = &a.v_grid {
        cfg.v_grid = grid.clone();
    }
    cfg.workers = match a.workers {
        Some(w) => w as usize,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let harness = |e: mc::HarnessError| CliError::Usage(e.to_string());
    match a.mode {
        Mode::Tail => {
            let rows = mc::run_tail_experiment(&cfg).map_err(harness)?;
            match a.format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&mc::tail_json(&cfg, &rows)).expect("json values serialize"))?,
                _ => mc::write_tail_csv(&cfg, &rows, &mut *out)?,
            }
        }
        Mode::Filter => {
            let o = mc::run_filter_experiment(&cfg, a.precision).map_err(harness)?;
            match a.format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&mc::filter_json(&cfg, &o)).expect("json values serialize"))?,
                _ => mc::write_filter_csv(&cfg, &o, &mut *out)?,
            }
        }
    }
    Ok(())
}
