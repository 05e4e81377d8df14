//! The `tsls` command line: fit survey reports, simulate surveys from a known
//! gap distribution, and recompute diagnostics from stored draws.
//!
//! Exit status is 0 on success, 2 when a convergence diagnostic is flagged,
//! and 1 on any error. Errors are written to stderr as one JSON object,
//! `{"error": <kind>, "message": <text>}`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use tsls_core::diagnostics::DiagnosticsReport;
use tsls_core::estimates::{summarize_distributions, EstimateSummary};
use tsls_core::io::{
    ingest_path, read_draws_path, write_dataset_csv, write_draws_csv, ExclusionReport,
};
use tsls_core::sampler::sample_with_progress;
use tsls_core::{
    simulate_survey, spread_mass, BasisConfig, HeapSet, Parameterization, ReportingBehavior,
    SamplerConfig, SplineBasisF64, TrueTbsF64,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FLAGGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tsls",
    version,
    about = "Bayesian estimation of time-since-last-sex and time-between-sex distributions",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the spline model to a `z,unit` CSV and write estimates.
    Fit(FitArgs),
    /// Draw a synthetic survey from a known gap distribution.
    Simulate(SimulateArgs),
    /// Recompute convergence diagnostics from a draws CSV.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub outdir: PathBuf,
    /// Number of equal-width knot segments over the two-year window.
    #[arg(long, default_value_t = 30)]
    pub knots: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Iterations per chain, warm-up included.
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.95])]
    pub levels: Vec<f64>,
    /// Days respondents heap on.
    #[arg(long, value_delimiter = ',', default_values_t = [7, 14, 21, 28, 30, 60, 90])]
    pub heap_days: Vec<u32>,
    /// Half-width in days of the window a heaped report stands for.
    #[arg(long, default_value_t = 2)]
    pub heap_halfwidth: u32,
    /// Treat every day report as exact.
    #[arg(long, conflicts_with_all = ["heap_days", "heap_halfwidth"])]
    pub no_heaping: bool,
    #[arg(long, default_value_t = 0.95)]
    pub target_accept: f64,
    #[arg(long, value_enum, default_value_t = Coordinates::NonCentered)]
    pub parameterization: Coordinates,
    /// Sample the prior and ignore the data likelihood.
    #[arg(long)]
    pub prior_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Coordinates {
    Centered,
    NonCentered,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// `geometric:p=0.1`, `point:g=1`, `uniform`, or `bimodal:p=0.2,g=60,w=0.3`.
    #[arg(long)]
    pub truth: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub outdir: PathBuf,
    #[arg(long, value_enum, default_value_t = Reporting::Mixed)]
    pub reporting: Reporting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reporting {
    /// Days, weeks, months and years, chosen by magnitude, with heaping.
    Mixed,
    /// Every report in exact days.
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub draws: PathBuf,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "message": self.message }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<tsls_core::Error> for CliError {
    fn from(e: tsls_core::Error) -> Self {
        Self::new(e.kind(), e.to_string())
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new("io", format!("{}: {e}", path.display()))
}

pub type CliResult<T> = Result<T, CliError>;

/// Everything a fit run produces, for callers that want more than files.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub outdir: PathBuf,
    pub records_used: usize,
    pub excluded: usize,
    pub max_rhat: f64,
    pub min_ess_bulk: f64,
    pub min_ess_tail: f64,
    pub divergences: usize,
    pub flags: Vec<String>,
    pub mean_tbs_median: f64,
}

#[derive(Serialize)]
struct EstimatesFile<'a> {
    records_used: usize,
    exclusions: &'a ExclusionReport,
    basis: &'a BasisConfig,
    sampler: &'a SamplerConfig,
    heap_days: Vec<u32>,
    heap_halfwidth: u32,
    #[serde(flatten)]
    summary: &'a EstimateSummary,
}

fn create_outdir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_error(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

impl FitArgs {
    pub fn heap(&self) -> CliResult<HeapSet> {
        if self.no_heaping {
            Ok(HeapSet::none())
        } else {
            Ok(HeapSet::new(self.heap_days.iter().copied(), self.heap_halfwidth)?)
        }
    }

    pub fn basis_config(&self) -> BasisConfig {
        BasisConfig::new(self.knots, self.degree)
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            chains: self.chains,
            iterations_per_chain: self.iters,
            warmup: self.warmup,
            seed: self.seed,
            target_accept: self.target_accept,
            prior_only: self.prior_only,
            parameterization: match self.parameterization {
                Coordinates::Centered => Parameterization::Centered,
                Coordinates::NonCentered => Parameterization::NonCentered,
            },
            ..SamplerConfig::default()
        }
    }
}

pub fn run_fit(args: &FitArgs) -> CliResult<FitReport> {
    tsls_core::estimates::validate_levels(&args.levels)?;
    let basis_config = args.basis_config();
    basis_config.validate()?;
    let sampler = args.sampler_config();
    sampler.validate()?;
    let heap = args.heap()?;

    let ingested = ingest_path(&args.input, heap.clone()).map_err(|e| match e {
        tsls_core::Error::Io(io) => io_error(&args.input, io),
        other => other.into(),
    })?;
    let data = &ingested.dataset;
    log::info!(
        "{} records used, {} excluded beyond two years",
        ingested.exclusions.rows_used,
        ingested.exclusions.excluded
    );

    let basis = SplineBasisF64::build(&basis_config)?;
    let draws = sample_with_progress(&sampler, data, &basis, &|p| {
        if p.iteration == p.total || p.iteration % 500 == 0 {
            log::debug!("chain {}: {}/{}", p.chain, p.iteration, p.total);
        }
    })?;
    let diagnostics = DiagnosticsReport::from_draws(&draws)?;
    let summary = summarize_distributions(&draws.phi_draws(&basis)?, &args.levels)?;

    create_outdir(&args.outdir)?;
    let draws_path = args.outdir.join("draws.csv");
    write_draws_csv(&draws, create(&draws_path)?).map_err(|e| io_error(&draws_path, e))?;
    write_json(&args.outdir.join("diagnostics.json"), &diagnostics)?;
    write_json(
        &args.outdir.join("estimates.json"),
        &EstimatesFile {
            records_used: data.len(),
            exclusions: &ingested.exclusions,
            basis: &basis_config,
            sampler: &sampler,
            heap_days: heap.days().collect(),
            heap_halfwidth: heap.halfwidth(),
            summary: &summary,
        },
    )?;
    write_histogram(&args.outdir.join("histogram.csv"), &spread_mass::<f64>(data), &summary)?;

    Ok(FitReport {
        outdir: args.outdir.clone(),
        records_used: data.len(),
        excluded: ingested.exclusions.excluded,
        max_rhat: diagnostics.max_rhat(),
        min_ess_bulk: diagnostics.min_ess_bulk(),
        min_ess_tail: diagnostics.min_ess_tail(),
        divergences: diagnostics.divergences,
        flags: diagnostics.flags.clone(),
        mean_tbs_median: summary.mean_tbs.median,
    })
}

/// Per-day report mass next to the fitted curve: `weight` counts records
/// spread evenly over their intervals, `density` divides by the record count
/// so it sits on the same scale as `phi_median`.
fn write_histogram(path: &Path, weights: &[f64], summary: &EstimateSummary) -> CliResult<()> {
    let total: f64 = weights.iter().sum();
    let mut csv = csv::Writer::from_writer(create(path)?);
    let wrap = |e: csv::Error| io_error(path, e);
    csv.write_record(["day", "weight", "density", "phi_median"]).map_err(wrap)?;
    for (day, (w, phi)) in weights.iter().zip(&summary.tsls).enumerate() {
        csv.write_record([
            day.to_string(),
            w.to_string(),
            (w / total).to_string(),
            phi.median.to_string(),
        ])
        .map_err(wrap)?;
    }
    csv.flush().map_err(|e| io_error(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub survey: PathBuf,
    pub truth: PathBuf,
    pub records: usize,
    pub mean_tbs: f64,
}

/// Writes `survey.csv` (the `z,unit` reports) and `truth.csv` (`day,tbs,tsls`).
pub fn run_simulate(args: &SimulateArgs) -> CliResult<SimulateReport> {
    if args.n == 0 {
        return Err(CliError::new("config", "--n must be at least 1"));
    }
    let truth: TrueTbsF64 = args.truth.parse()?;
    let behavior = match args.reporting {
        Reporting::Mixed => ReportingBehavior::default(),
        Reporting::Exact => ReportingBehavior::day_exact(),
    };
    let data = simulate_survey(&truth, &behavior, args.n, args.seed)?;

    create_outdir(&args.outdir)?;
    let survey = args.outdir.join("survey.csv");
    write_dataset_csv(&data, create(&survey)?).map_err(|e| io_error(&survey, e))?;

    let truth_path = args.outdir.join("truth.csv");
    let phi = truth.tsls();
    let mut csv = csv::Writer::from_writer(create(&truth_path)?);
    let wrap = |e: csv::Error| io_error(&truth_path, e);
    csv.write_record(["day", "tbs", "tsls"]).map_err(wrap)?;
    for (day, (f, p)) in truth.probabilities().iter().zip(phi.probabilities()).enumerate() {
        csv.write_record([day.to_string(), f.to_string(), p.to_string()]).map_err(wrap)?;
    }
    csv.flush().map_err(|e| io_error(&truth_path, e))?;

    Ok(SimulateReport { survey, truth: truth_path, records: data.len(), mean_tbs: truth.mean() })
}

pub fn run_diagnose(args: &DiagnoseArgs) -> CliResult<DiagnosticsReport> {
    let table = read_draws_path(&args.draws).map_err(|e| match e {
        tsls_core::Error::Io(io) => io_error(&args.draws, io),
        other => other.into(),
    })?;
    let report = DiagnosticsReport::from_chains(&table.chains, &table.parameter_names)?;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(report)
}

/// Runs a parsed command, prints its JSON result to stdout, and returns the
/// exit status.
pub fn run(cli: &Cli) -> CliResult<i32> {
    let (value, flagged) = match &cli.command {
        Command::Fit(args) => {
            let report = run_fit(args)?;
            let flagged = !report.flags.is_empty();
            (serde_json::to_value(report), flagged)
        }
        Command::Simulate(args) => (serde_json::to_value(run_simulate(args)?), false),
        Command::Diagnose(args) => {
            let report = run_diagnose(args)?;
            let flagged = report.is_flagged();
            (serde_json::to_value(report), flagged)
        }
    };
    let value = value.map_err(|e| CliError::new("serialize", e.to_string()))?;
    let text = serde_json::to_string_pretty(&value).expect("a JSON value serializes");
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            return Err(CliError::new("io", format!("stdout: {e}")));
        }
        _ => {}
    }
    if flagged {
        log::warn!("convergence diagnostics flagged; see diagnostics.json");
        Ok(EXIT_FLAGGED)
    } else {
        Ok(EXIT_OK)
    }
}
