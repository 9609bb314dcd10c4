//! Command-line surface for the momenta toolkit: measures in, moment tables
//! out; moment tables in, determinacy verdicts out; Hermitian matrices in,
//! spectra, outcome statistics, and reconstructions out; and the two-bump
//! phase sweep with its full report.
//!
//! Machine-readable output (CSV, JSON) goes to stdout or the requested
//! files; human diagnostics go to stderr. Exit codes are a stable contract:
//! 0 success, 2 input validation, 3 insufficient data, 4 scenario
//! contradiction, 1 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Deserialize;

use momenta::interference::{export_report, run_scenario, ScenarioConfig};
use momenta::measure::{MeasureSpec, MomentSequence};
use momenta::moments::classify_determinacy;
use momenta::operators::{
    outcome_distribution, reconstruct_from_expectations, spectral_measure_default,
    HermitianOperator,
};
use momenta::Error;

/// Environment variable overriding the default moment-tail tolerance.
const TOL_ENV: &str = "MOMENTA_TOL";
const DEFAULT_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "momenta",
    version,
    about = "Moment problems for quantum measurement statistics",
    long_about = "Moment problems for quantum measurement statistics.\n\n\
        Machine-readable output (CSV/JSON) is written to stdout or to the \
        requested files; diagnostics go to stderr. The MOMENTA_TOL \
        environment variable overrides the default moment-tail tolerance \
        (1e-9) wherever --tol is not given.\n\n\
        Exit codes: 0 success, 2 input validation, 3 insufficient data, \
        4 scenario contradiction, 1 internal error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the moments of a measure as CSV (header n,value,status)
    Moments(MomentsArgs),
    /// Classify a moment table: compactly supported, exponentially bounded, or inconclusive
    Determinacy(DeterminacyArgs),
    /// Rebuild a Hermitian matrix from its expectation functional by polarization
    Reconstruct(ReconstructArgs),
    /// Run the two-bump phase sweep and export its report files
    Interference(InterferenceArgs),
    /// Eigenvalues of a Hermitian matrix, or outcome statistics in a given state
    Spectra(SpectraArgs),
}

#[derive(Args)]
struct MomentsArgs {
    /// Measure description: JSON tagged by "variant" (Atoms, GridDensity,
    /// or Analytic with "name" Uniform/Gaussian/HeavyTail)
    #[arg(long)]
    measure: PathBuf,
    /// Highest moment order N; the table covers orders 0..=N
    #[arg(long, short = 'n', default_value_t = 8)]
    max_order: usize,
    /// Tail-convergence tolerance in (0, 1) [default: 1e-9, or MOMENTA_TOL when set]
    #[arg(long)]
    tol: Option<f64>,
    /// Write the CSV here instead of stdout
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DeterminacyArgs {
    /// Moment table: CSV with header n,value,status and contiguous orders from 0
    #[arg(long)]
    moments: PathBuf,
    /// Write the verdict JSON here instead of stdout
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Hermitian matrix: JSON with fields d, re, im (row-major d² arrays)
    #[arg(long)]
    matrix: PathBuf,
    /// Write the reconstructed matrix JSON here instead of stdout
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct InterferenceArgs {
    /// Scenario configuration JSON; omitted fields take the built-in
    /// defaults (bumps at ∓2 of half-width 1 on [-16,16], 4096 samples,
    /// 8 phases, orders through 8) [default: the built-in configuration]
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory the report files are written into (created if needed)
    #[arg(long, short = 'o')]
    output_dir: PathBuf,
    /// Override the phase list with count equispaced phases k·2π/count
    #[arg(long)]
    delta_count: Option<usize>,
    /// Override the grid sample count (a power of two ≥ 256)
    #[arg(long)]
    samples: Option<usize>,
    /// Override the highest moment order (≤ 8)
    #[arg(long, short = 'n')]
    max_order: Option<usize>,
}

#[derive(Args)]
struct SpectraArgs {
    /// Hermitian matrix: JSON with fields d, re, im (row-major d² arrays)
    #[arg(long)]
    matrix: PathBuf,
    /// Unit state vector: JSON with fields re and (optional) im. When
    /// given, the output is the outcome distribution as an atomic measure
    /// JSON (pipe it back into `moments`) instead of the spectrum
    #[arg(long)]
    state: Option<PathBuf>,
    /// Write the JSON here instead of stdout
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Stable error-to-exit-code table.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Validation(_)
        | Error::Representation(_)
        | Error::Degenerate(_)
        | Error::AccuracyBudget(_)
        | Error::OracleContract(_)
        | Error::NotInClass(_) => 2,
        Error::InsufficientData(_) => 3,
        Error::ScenarioContradiction { .. } => 4,
        Error::Io { .. } => 1,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Moments(args) => cmd_moments(args),
        Command::Determinacy(args) => cmd_determinacy(args),
        Command::Reconstruct(args) => cmd_reconstruct(args),
        Command::Interference(args) => cmd_interference(args),
        Command::Spectra(args) => cmd_spectra(args),
    }
}

/// Reads an input file; unreadable input is an input error, not an
/// internal one.
fn read_input(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

/// Parses JSON input, surfacing serde's message (which names the offending
/// field or position).
fn parse_json<'a, T: Deserialize<'a>>(text: &'a str, path: &Path) -> Result<T, Error> {
    serde_json::from_str(text)
        .map_err(|e| Error::Validation(format!("malformed JSON in {}: {e}", path.display())))
}

/// Writes machine output to the requested file, or to stdout when no file
/// was requested.
fn emit(output: Option<&Path>, content: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|source| Error::Io { path: path.display().to_string(), source }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, Error> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(TOL_ENV) {
        Ok(raw) => raw
            .parse::<f64>()
            .map_err(|_| Error::Validation(format!("{TOL_ENV} must be a float, got {raw:?}"))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn cmd_moments(args: MomentsArgs) -> Result<(), Error> {
    let spec: MeasureSpec = parse_json(&read_input(&args.measure)?, &args.measure)?;
    let tol = resolve_tol(args.tol)?;
    let seq = spec.moments_prefix(args.max_order, tol)?;
    eprintln!(
        "{} moment rows (orders 0..={}) for {}",
        seq.entries().len(),
        args.max_order,
        seq.source()
    );
    emit(args.output.as_deref(), &seq.csv())
}

fn cmd_determinacy(args: DeterminacyArgs) -> Result<(), Error> {
    let seq = MomentSequence::from_csv(&read_input(&args.moments)?)?;
    let verdict = classify_determinacy(&seq)?;
    eprintln!("horizon {}: {:?}", verdict.horizon, verdict.class);
    let mut json = serde_json::to_string(&verdict)
        .map_err(|e| Error::Validation(format!("verdict serialization failed: {e}")))?;
    json.push('\n');
    emit(args.output.as_deref(), &json)
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<(), Error> {
    let operator: HermitianOperator = parse_json(&read_input(&args.matrix)?, &args.matrix)?;
    let oracle = |phi: &DVector<Complex64>| phi.dotc(&(operator.matrix() * phi));
    let rebuilt = reconstruct_from_expectations(operator.dim(), oracle)?;
    eprintln!(
        "reconstructed {0}×{0} matrix from {1} expectation probes; max deviation {2:.3e}",
        operator.dim(),
        operator.dim() * operator.dim() * 2 - operator.dim(),
        operator.max_abs_diff(&rebuilt)
    );
    let mut json = serde_json::to_string(&rebuilt)
        .map_err(|e| Error::Validation(format!("matrix serialization failed: {e}")))?;
    json.push('\n');
    emit(args.output.as_deref(), &json)
}

fn cmd_interference(args: InterferenceArgs) -> Result<(), Error> {
    let mut cfg = match &args.config {
        Some(path) => parse_json::<ScenarioConfig>(&read_input(path)?, path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(count) = args.delta_count {
        let step = 2.0 * std::f64::consts::PI / count as f64;
        cfg.deltas = (0..count).map(|k| k as f64 * step).collect();
    }
    if let Some(samples) = args.samples {
        cfg.samples = samples;
    }
    if let Some(n) = args.max_order {
        cfg.max_order = n;
    }
    let report = run_scenario(&cfg)?;
    let written = export_report(&report, &args.output_dir)?;
    match report.headline_l1 {
        Some(d) => eprintln!(
            "sweep over {} phases: moments phase-blind (worst momentum residual {:.3e}), \
             headline distribution distance {d}",
            report.deltas.len(),
            report.p_invariance_residual.iter().fold(0.0f64, |a, r| a.max(*r)),
        ),
        None => eprintln!("single-phase sweep: no pairwise distances"),
    }
    let mut listing = String::new();
    for path in &written {
        listing.push_str(&format!("{}\n", path.display()));
    }
    print!("{listing}");
    Ok(())
}

/// State vector wire: "re" required, "im" optional (defaults to zeros).
#[derive(Deserialize)]
struct StateWire {
    re: Vec<f64>,
    #[serde(default)]
    im: Vec<f64>,
}

fn load_state(path: &Path) -> Result<DVector<Complex64>, Error> {
    let wire: StateWire = parse_json(&read_input(path)?, path)?;
    if !wire.im.is_empty() && wire.im.len() != wire.re.len() {
        return Err(Error::Validation(format!(
            "state has {} real and {} imaginary components",
            wire.re.len(),
            wire.im.len()
        )));
    }
    Ok(DVector::from_fn(wire.re.len(), |i, _| {
        Complex64::new(wire.re[i], wire.im.get(i).copied().unwrap_or(0.0))
    }))
}

fn cmd_spectra(args: SpectraArgs) -> Result<(), Error> {
    let operator: HermitianOperator = parse_json(&read_input(&args.matrix)?, &args.matrix)?;
    let json = match &args.state {
        Some(state_path) => {
            let phi = load_state(state_path)?;
            let distribution = outcome_distribution(&operator, &phi)?;
            eprintln!("outcome distribution in the given state (atomic measure JSON)");
            serde_json::to_string(&distribution)
        }
        None => {
            let decomposition = spectral_measure_default(&operator)?;
            let ranks: Vec<usize> = (0..decomposition.len()).map(|i| decomposition.rank(i)).collect();
            eprintln!(
                "{} distinct eigenvalue clusters of a {1}×{1} matrix",
                decomposition.len(),
                operator.dim()
            );
            serde_json::to_string(&serde_json::json!({
                "eigenvalues": decomposition.eigenvalues,
                "ranks": ranks,
            }))
        }
    }
    .map_err(|e| Error::Validation(format!("serialization failed: {e}")))?;
    emit(args.output.as_deref(), &format!("{json}\n"))
}
