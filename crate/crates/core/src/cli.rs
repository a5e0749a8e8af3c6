//! The `pbf` command line: `test`, `simulate`, `power`, `sweep` and
//! `spectrum`.
//!
//! JSON and CSV results go to stdout, diagnostics and the effective seed to
//! stderr. Exit codes: 0 completed, 1 usage error, 2 data error, 3 numerical
//! failure.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::curves::{pairwise_inner_products, GramMatrix, GridSpec, Quadrature, ReprKind};
use crate::error::{Error, Result};
use crate::harness::{
    append_ledger, ingest_csv, ingest_labelled, ingest_pair, parse_kv_pairs, read_grid_file,
    run_power_with, run_sweep_with, simulate, write_curves_csv, write_json, HeaderMode, Param,
    PowerEstimate, ScenarioConfig,
};
use crate::permute::{
    exhaustive_test, permutation_test_gram, PermutationOptions, TestResult, DEFAULT_B,
};
use crate::curves::gram;
use crate::spectrum::{sample_limit_law, spectrum_estimate};
use crate::statistic::PhiKind;
use crate::stats::quantile_sorted;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pbf", version, about = "Projected Baringhaus-Franz two-sample test for functional data")]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Permutation test of two samples read from CSV.
    Test(TestArgs),
    /// Write generated samples of a scenario as CSV.
    Simulate(SimulateArgs),
    /// Rejection rates of a scenario over many replications.
    Power(PowerArgs),
    /// Power study repeated over a list of parameter values.
    Sweep(SweepArgs),
    /// Eigenvalues and quantiles of the estimated null limit law.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReprArg {
    Grid,
    Coeff,
}

impl From<ReprArg> for ReprKind {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Grid => ReprKind::Grid,
            ReprArg::Coeff => ReprKind::Coeff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuadArg {
    Trapezoid,
    Riemann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeaderArg {
    Auto,
    Yes,
    No,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV of the first sample.
    pub x: Option<PathBuf>,
    /// CSV of the second sample.
    pub y: Option<PathBuf>,
    /// Single CSV holding both samples (needs --label-column unless the
    /// command pools all curves).
    #[arg(long, conflicts_with_all = ["x", "y"])]
    pub input: Option<PathBuf>,
    /// 0-based column of group labels in --input.
    #[arg(long, requires = "input")]
    pub label_column: Option<usize>,
    /// Curve values are grid evaluations or basis coefficients.
    #[arg(long, value_enum, default_value = "grid")]
    pub repr: ReprArg,
    /// One-line file of grid abscissae.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "trapezoid")]
    pub quadrature: QuadArg,
    /// Whether the first row is a header.
    #[arg(long, value_enum, default_value = "auto")]
    pub header: HeaderArg,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "l2")]
    pub phi: PhiKind,
    /// Random permutations.
    #[arg(long = "B", short = 'B', alias = "b", default_value_t = DEFAULT_B)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include the permuted statistics in the output.
    #[arg(long)]
    pub keep_replicates: bool,
    /// Enumerate every group assignment instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,
    /// Largest number of assignments --exhaustive will enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_assignments: usize,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// key=value configuration file; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ex1, ex2, ex3, ex4i, ex4ii, ex5i, ex5ii, ex6i, ex6ii, ex7, ex8, ex9
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Defaults to n.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long = "B", short = 'B', alias = "b")]
    pub b: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated list of l2, exp, log, or `all`.
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Points of the equispaced simulation grid.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Use sqrt(2) cos(2 pi i t) for the cosine family.
    #[arg(long)]
    pub normalized_cos: bool,
    /// Evaluate the sine/cosine families on the simulation grid.
    #[arg(long)]
    pub sincos_grid: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Curves per sample (sets n and m).
    #[arg(long)]
    pub count: Option<usize>,
    /// Directory receiving x.csv and y.csv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// CSV ledger the result rows are appended to.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// JSON copy of the results.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// n, r, sigma, d or delta.
    #[arg(long)]
    pub param: String,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "l2")]
    pub phi: PhiKind,
    /// Limit of n / (n + m); defaults to the observed ratio, or 1/2 for a
    /// pooled file.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Monte-Carlo draws from the limit law.
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    /// Probabilities of the quantile table.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.95,0.99")]
    pub probs: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("warning: could not configure the thread pool: {e}");
        }
    }
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical_failure() {
        EXIT_NUMERICAL
    } else if e.is_data_error() {
        EXIT_DATA
    } else {
        EXIT_USAGE
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Test(a) => cmd_test(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Power(a) => cmd_power(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
    }
}

fn effective_seed(seed: Option<u64>) -> u64 {
    let seed = seed.unwrap_or_else(rand::random);
    eprintln!("seed: {seed}");
    seed
}

fn header_mode(h: HeaderArg) -> HeaderMode {
    match h {
        HeaderArg::Auto => HeaderMode::Auto,
        HeaderArg::Yes => HeaderMode::Present,
        HeaderArg::No => HeaderMode::Absent,
    }
}

fn explicit_grid(input: &InputArgs) -> Result<Option<GridSpec>> {
    let quad = match input.quadrature {
        QuadArg::Trapezoid => Quadrature::Trapezoid,
        QuadArg::Riemann => Quadrature::RiemannLeft,
    };
    input
        .grid
        .as_deref()
        .map(|p| read_grid_file(p, quad))
        .transpose()
        .map(|g| g.map(|g| g.with_quadrature(quad)))
}

fn report_dropped(dropped: usize) {
    if dropped > 0 {
        eprintln!("dropped {dropped} row(s) with missing values");
    }
}

fn load_two_samples(input: &InputArgs) -> Result<crate::harness::Ingested> {
    let grid = explicit_grid(input)?;
    let repr = ReprKind::from(input.repr);
    let header = header_mode(input.header);
    let got = match (&input.x, &input.y, &input.input, input.label_column) {
        (Some(x), Some(y), None, _) => ingest_pair(x, y, repr, grid.as_ref(), header)?,
        (None, None, Some(path), Some(col)) => {
            ingest_labelled(path, repr, grid.as_ref(), header, col)?
        }
        (None, None, Some(_), None) => {
            return Err(Error::invalid("--input needs --label-column to split the groups"))
        }
        _ => return Err(Error::invalid("give two sample files, or --input with --label-column")),
    };
    report_dropped(got.dropped);
    Ok(got)
}

#[derive(Serialize)]
struct TestOutput {
    #[serde(flatten)]
    result: TestResult,
    alpha: f64,
    reject: bool,
    dropped: usize,
}

fn cmd_test(a: &TestArgs) -> Result<()> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let seed = effective_seed(a.seed);
    let got = load_two_samples(&a.input)?;
    let g = gram(&got.sample)?;
    let result = if a.exhaustive {
        let mut r = exhaustive_test(&g, got.sample.labels(), a.phi, a.max_assignments)?;
        r.seed = seed;
        r
    } else {
        permutation_test_gram(
            &g,
            got.sample.labels(),
            a.phi,
            PermutationOptions::new(a.b, seed).keep_replicates(a.keep_replicates),
        )?
    };
    let out = TestOutput {
        reject: result.rejects(a.alpha),
        alpha: a.alpha,
        dropped: got.dropped,
        result,
    };
    print_json(&out)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    Ok(())
}

/// Scenario configuration from the optional file plus flag overrides.
pub fn scenario_config(a: &ScenarioArgs) -> Result<ScenarioConfig> {
    let mut pairs = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_kv_pairs(&text)?
        }
        None => Vec::new(),
    };
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.push((k.to_string(), v));
        }
    };
    set("scenario", a.scenario.clone());
    set("n", a.n.map(|v| v.to_string()));
    set("m", a.m.map(|v| v.to_string()));
    set("B", a.b.map(|v| v.to_string()));
    set("alpha", a.alpha.map(|v| v.to_string()));
    set("reps", a.reps.map(|v| v.to_string()));
    set("phi", a.phi.clone());
    set("seed", a.seed.map(|v| v.to_string()));
    set("r", a.r.map(|v| v.to_string()));
    set("sigma", a.sigma.map(|v| v.to_string()));
    set("d", a.d.map(|v| v.to_string()));
    set("delta", a.delta.map(|v| v.to_string()));
    set("grid_points", a.grid_points.map(|v| v.to_string()));
    if a.normalized_cos {
        set("normalized_cos", Some("true".into()));
    }
    if a.sincos_grid {
        set("sincos_grid", Some("true".into()));
    }
    let explicit_seed = pairs.iter().find(|(k, _)| k == "seed").is_some();
    let mut config = ScenarioConfig::from_pairs(&pairs)?;
    config.seed = effective_seed(explicit_seed.then_some(config.seed));
    Ok(config)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let mut config = scenario_config(&a.scenario)?;
    if let Some(count) = a.count {
        config.set_param(Param::N, count as f64)?;
    }
    config.validate()?;
    let (xs, ys) = simulate(&config)?;
    let grid = config.sample_grid()?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let x_path = a.out_dir.join("x.csv");
    let y_path = a.out_dir.join("y.csv");
    for (path, curves) in [(&x_path, &xs), (&y_path, &ys)] {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_curves_csv(std::io::BufWriter::new(file), curves, grid.as_ref())?;
    }
    #[derive(Serialize)]
    struct Written<'a> {
        x: &'a Path,
        y: &'a Path,
        repr: &'static str,
        n: usize,
        m: usize,
        seed: u64,
    }
    print_json(&Written {
        x: &x_path,
        y: &y_path,
        repr: if grid.is_some() { "grid" } else { "coeff" },
        n: config.n,
        m: config.m,
        seed: config.seed,
    })
}

fn progress_printer() -> Option<Box<dyn Fn(usize, usize) + Sync>> {
    if !std::io::stderr().is_terminal() {
        return None;
    }
    Some(Box::new(|done, total| {
        let mut err = std::io::stderr().lock();
        let _ = write!(err, "\rreplication {done}/{total}");
        if done == total {
            let _ = writeln!(err);
        }
    }))
}

fn persist(estimates: &[PowerEstimate], out: &OutputArgs) -> Result<()> {
    if let Some(path) = &out.ledger {
        let rows: Vec<_> = estimates.iter().flat_map(PowerEstimate::ledger_rows).collect();
        append_ledger(path, &rows)?;
    }
    if let Some(path) = &out.json {
        write_json(path, estimates)?;
    }
    Ok(())
}

fn cmd_power(a: &PowerArgs) -> Result<()> {
    let config = scenario_config(&a.scenario)?;
    let progress = progress_printer();
    let est = run_power_with(&config, progress.as_deref())?;
    let table = [est];
    persist(&table, &a.output)?;
    print_json(&table[0])
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let config = scenario_config(&a.scenario)?;
    let param: Param = a.param.parse()?;
    let progress = progress_printer();
    let table = run_sweep_with(&config, param, &a.values, progress.as_deref())?;
    persist(&table, &a.output)?;
    print_json(&table)
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<()> {
    if let Some(p) = a.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("quantile probability {p} is outside [0, 1]")));
    }
    let seed = effective_seed(a.seed);
    let input = &a.input;
    let (g, observed_ratio) = match (&input.input, input.label_column) {
        (Some(path), None) => {
            let grid = explicit_grid(input)?;
            let set = ingest_csv(path, input.repr.into(), grid.as_ref(), header_mode(input.header))?;
            report_dropped(set.dropped);
            let dim = set.curves.len();
            let flat = pairwise_inner_products(&set.curves, set.grid.as_ref())?;
            let rows: Vec<Vec<f64>> = flat.chunks(dim.max(1)).map(<[f64]>::to_vec).collect();
            (GramMatrix::from_rows(&rows, dim, 0)?, 0.5)
        }
        _ => {
            let got = load_two_samples(input)?;
            let ratio = got.sample.n() as f64 / got.sample.len() as f64;
            (gram(&got.sample)?, ratio)
        }
    };
    let spectrum = spectrum_estimate(&g, a.phi, a.lambda.unwrap_or(observed_ratio))?;
    let mut draws = sample_limit_law(&spectrum, a.draws, None, seed)?;
    draws.sort_unstable_by(f64::total_cmp);

    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["table", "key", "value"])?;
    for (k, lam) in spectrum.eigenvalues.iter().enumerate() {
        w.write_record(["eigenvalue", &(k + 1).to_string(), &lam.to_string()])?;
    }
    for p in &a.probs {
        let q = quantile_sorted(&draws, *p);
        w.write_record(["quantile", &p.to_string(), &q.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<spectrum output>", e))?;
    Ok(())
}
