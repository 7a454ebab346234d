//! Command implementations behind the `qkmeans` binary.
//!
//! Every command writes its outputs plus a `RunManifest` recording the seed,
//! inputs and resolved parameters. Exit codes: 0 success, 1 usage or
//! configuration error, 2 data validation error.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qkmeans::clustering::{DistanceMode, FitConfig};
use qkmeans::complexity::{generate_curves, log_range, CurveSpec};
use qkmeans::crosstalk::{
    analyze_pair, flag_crosstalk, read_named_block, write_named_block, FidelityComparison, FlagThresholds,
    NamedCoefficients,
};
use qkmeans::iqdata::{
    assemble_datasets, load_table, save_table, synthesize, CouplingMap, ReadoutModel, TableFormat,
    DEFAULT_SHOTS_PER_SCHEDULE,
};
use qkmeans::metrics::{cross_validate, HalfWidth, Metric, ScoreReport};
use serde::Serialize;

pub const OUT_DIR_ENV: &str = "QKMEANS_OUT_DIR";
pub const SCORE_HEADER: [&str; 6] = ["pair", "qubit", "dataset", "score", "mean", "half_width"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] qkmeans::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Core(e) if e.is_data_error() => 2,
            CliError::Core(_) => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "qkmeans", version, about = "Quantum k-means readout discrimination and crosstalk analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize IQ readout shots for every coupled pair.
    Synth(SynthArgs),
    /// Cross-validated clustering scores for every qubit of every pair.
    Benchmark(BenchmarkArgs),
    /// Correlation grids, named coefficients and crosstalk flags.
    Crosstalk(CrosstalkArgs),
    /// Classical vs quantum cost curves.
    Complexity(ComplexityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutDir {
    /// Directory for outputs whose path is not given explicitly.
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Readout model (TOML); the built-in 5-qubit default when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Coupling map (TOML); the built-in linear chain when omitted.
    #[arg(long)]
    pub coupling: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SHOTS_PER_SCHEDULE)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output table; defaults to `<out-dir>/iq_shots.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dir: OutDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Tsv,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => TableFormat::Csv,
            Format::Tsv => TableFormat::Tsv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Kmeans,
    Qkmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    Fidelity,
    Fm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfWidthArg {
    Std,
    Ci95,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    /// IQ shot table written by `synth` (or recorded externally).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = Algo::Qkmeans)]
    pub algo: Algo,
    /// Distance evaluation for qkmeans; ignored by kmeans.
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = MetricArg::Fidelity)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 10)]
    pub splits: usize,
    /// Shots per SwapTest circuit in sampled mode.
    #[arg(long, default_value_t = 1024)]
    pub circuit_shots: u64,
    /// What the `±` column reports.
    #[arg(long, value_enum, default_value_t = HalfWidthArg::Std)]
    pub half_width: HalfWidthArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output table; defaults to `<out-dir>/scores_<algo>_<metric>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dir: OutDir,
}

#[derive(Debug, Clone, Args)]
pub struct CrosstalkArgs {
    /// IQ shot table to analyze.
    #[arg(long, required_unless_present = "coefficients", conflicts_with = "coefficients")]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Precomputed named-coefficient block used instead of `--data`.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    /// Assignment-fidelity score tables from `benchmark`, covering the same pairs.
    #[arg(long, num_args = 1..)]
    pub scores: Vec<PathBuf>,
    #[arg(long, default_value_t = qkmeans::crosstalk::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = qkmeans::crosstalk::DEFAULT_FIDELITY_GAP)]
    pub fidelity_gap: f64,
    /// Output directory; defaults to `<out-dir>/crosstalk`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dir: OutDir,
}

#[derive(Debug, Clone, Args)]
pub struct ComplexityArgs {
    /// Sample counts as `lo:hi` (every integer) or `lo:hi:count` (log-spaced).
    #[arg(long, default_value = "10:10000:31")]
    pub n_range: String,
    /// Feature counts, same syntax as `--n-range`.
    #[arg(long, default_value = "1:64")]
    pub f_range: String,
    /// Sample count held fixed while features vary.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Feature count held fixed while samples vary.
    #[arg(long, default_value_t = 2)]
    pub f: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub i: usize,
    #[arg(long, default_value_t = qkmeans::distance::DEFAULT_MAX_CIRCUITS_PER_JOB)]
    pub c: usize,
    /// Output directory; defaults to `<out-dir>/complexity`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub dir: OutDir,
}

/// Everything needed to reproduce a command's outputs, except the timestamp.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            parameters: BTreeMap::new(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.into(), value.to_string());
    }

    fn write(&self, path: &Path) -> CliResult<()> {
        let text = toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))?;
        fs::write(path, text).map_err(|e| io_error(path, e))
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| io_error(dir, e)),
        _ => Ok(()),
    }
}

/// `<file>.manifest.toml` next to a file output.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.toml");
    output.with_file_name(name)
}

fn read_config(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn config_error(path: &Path, e: qkmeans::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<PathBuf> {
    let mut manifest = RunManifest::new("synth", Some(args.seed));
    let model = match &args.model {
        Some(p) => {
            manifest.inputs.push(display(p));
            ReadoutModel::from_toml(&read_config(p)?).map_err(|e| config_error(p, e))?
        }
        None => ReadoutModel::default(),
    };
    let coupling = match &args.coupling {
        Some(p) => {
            manifest.inputs.push(display(p));
            CouplingMap::from_toml(&read_config(p)?).map_err(|e| config_error(p, e))?
        }
        None => CouplingMap::default(),
    };
    if args.shots == 0 {
        return Err(CliError::Config("--shots must be at least 1".into()));
    }
    let table = synthesize(&model, &coupling, args.shots, args.seed).map_err(|e| CliError::Config(e.to_string()))?;
    let out = args.out.clone().unwrap_or_else(|| args.dir.out_dir.join("iq_shots.csv"));
    ensure_parent(&out)?;
    save_table(&table, &out, args.format.into())?;
    manifest.outputs.push(display(&out));
    manifest.param("shots", args.shots);
    manifest.param("format", format!("{:?}", args.format).to_lowercase());
    manifest.param("model", model.to_toml());
    manifest.param("coupling", coupling.to_toml());
    manifest.write(&manifest_path(&out))?;
    Ok(out)
}

/// One row of a benchmark score table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub pair: (usize, usize),
    pub qubit: usize,
    pub dataset: String,
    pub report: ScoreReport,
}

pub fn score_rows(
    data: &qkmeans::iqdata::IQShotTable,
    config: &FitConfig,
    splits: usize,
    metric: Metric,
    seed: u64,
    half_width: HalfWidth,
) -> CliResult<Vec<ScoreRow>> {
    let mut rows = Vec::new();
    for pair in data.pairs() {
        for qubit in [pair.0, pair.1] {
            let (single, both) = assemble_datasets(data, qubit, pair)?;
            for (name, set) in [("single", &single), ("both", &both)] {
                let report = cross_validate(set, config, splits, metric, seed)?.with_half_width(half_width);
                rows.push(ScoreRow {
                    pair,
                    qubit,
                    dataset: name.into(),
                    report,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_scores(rows: &[ScoreRow], path: &Path) -> CliResult<()> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let mut line = |text: String| writeln!(w, "{text}").map_err(|e| io_error(path, e));
    line(SCORE_HEADER.join(","))?;
    for r in rows {
        line(format!(
            "{}-{},Q{},{},{},{},{}",
            r.pair.0, r.pair.1, r.qubit, r.dataset, r.report, r.report.mean, r.report.half_width
        ))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once('-')?;
    Some((a.parse().ok()?, b.parse().ok()?))
}

pub type ScoreMeans = BTreeMap<((usize, usize), usize, String), f64>;

/// Reads `(pair, qubit, dataset) → mean` from a score table.
pub fn read_scores(path: &Path) -> CliResult<ScoreMeans> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let bad = |line: usize, msg: &str| CliError::Data(format!("{}:{line}: {msg}", path.display()));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == SCORE_HEADER.join(",") => {}
        _ => return Err(bad(1, "not a score table")),
    }
    let mut out = BTreeMap::new();
    for (n, l) in lines {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != SCORE_HEADER.len() {
            return Err(bad(n + 1, "wrong number of fields"));
        }
        let pair = parse_pair(f[0]).ok_or_else(|| bad(n + 1, "bad pair"))?;
        let qubit = f[1]
            .strip_prefix('Q')
            .and_then(|q| q.parse().ok())
            .ok_or_else(|| bad(n + 1, "bad qubit"))?;
        let mean: f64 = f[4].parse().map_err(|_| bad(n + 1, "bad mean"))?;
        out.insert((pair, qubit, f[2].to_string()), mean);
    }
    Ok(out)
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> CliResult<PathBuf> {
    let mut manifest = RunManifest::new("benchmark", Some(args.seed));
    let table = load_table(&args.data, args.format.into())?;
    if table.is_empty() {
        return Err(CliError::Data(format!("{}: no shots", args.data.display())));
    }
    manifest.inputs.push(display(&args.data));
    let mode = match (args.algo, args.mode) {
        (Algo::Kmeans, _) => DistanceMode::ClassicalEuclidean,
        (Algo::Qkmeans, Mode::Exact) => DistanceMode::QuantumExact,
        (Algo::Qkmeans, Mode::Sampled) => DistanceMode::QuantumSampled,
    };
    let mut config = FitConfig::new(2).with_mode(mode).with_seed(args.seed);
    config.batch.shots_per_circuit = args.circuit_shots;
    let metric = match args.metric {
        MetricArg::Fidelity => Metric::AssignmentFidelity,
        MetricArg::Fm => Metric::FowlkesMallows,
    };
    let half_width = match args.half_width {
        HalfWidthArg::Std => HalfWidth::StdDev,
        HalfWidthArg::Ci95 => HalfWidth::Ci95,
    };
    if args.splits < 2 {
        return Err(CliError::Config("--splits must be at least 2".into()));
    }
    let rows = score_rows(&table, &config, args.splits, metric, args.seed, half_width)?;
    let algo = format!("{:?}", args.algo).to_lowercase();
    let metric_name = format!("{:?}", args.metric).to_lowercase();
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.dir.out_dir.join(format!("scores_{algo}_{metric_name}.csv")));
    ensure_parent(&out)?;
    write_scores(&rows, &out)?;
    manifest.outputs.push(display(&out));
    manifest.param("algo", algo);
    manifest.param("mode", format!("{mode:?}"));
    manifest.param("metric", metric_name);
    manifest.param("splits", args.splits);
    manifest.param("circuit_shots", args.circuit_shots);
    manifest.param("half_width", format!("{half_width:?}"));
    manifest.param("max_iter", config.max_iter);
    manifest.param("tol", config.tol);
    manifest.write(&manifest_path(&out))?;
    Ok(out)
}

fn comparisons(scores: &[PathBuf]) -> CliResult<Vec<FidelityComparison>> {
    let mut means = BTreeMap::new();
    for path in scores {
        means.extend(read_scores(path)?);
    }
    let mut keys: Vec<((usize, usize), usize)> = means.keys().map(|(p, q, _)| (*p, *q)).collect();
    keys.dedup();
    keys.into_iter()
        .map(|(pair, qubit)| {
            let get = |d: &str| {
                means.get(&(pair, qubit, d.to_string())).copied().ok_or_else(|| {
                    CliError::Data(format!("scores lack the {d} row for qubit {qubit} of pair {}-{}", pair.0, pair.1))
                })
            };
            Ok(FidelityComparison {
                pair,
                qubit,
                single: get("single")?,
                both: get("both")?,
            })
        })
        .collect()
}

pub fn cmd_crosstalk(args: &CrosstalkArgs) -> CliResult<PathBuf> {
    let mut manifest = RunManifest::new("crosstalk", None);
    let out = args.out.clone().unwrap_or_else(|| args.dir.out_dir.join("crosstalk"));
    fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    let named: Vec<NamedCoefficients> = match (&args.data, &args.coefficients) {
        (Some(data), _) => {
            manifest.inputs.push(display(data));
            let table = load_table(data, args.format.into())?;
            if table.is_empty() {
                return Err(CliError::Data(format!("{}: no shots", data.display())));
            }
            let mut named = Vec::new();
            for pair in table.pairs() {
                let report = analyze_pair(&table, pair)?;
                let path = out.join(format!("correlation_{}-{}.csv", pair.0, pair.1));
                let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
                report.write_grid(BufWriter::new(file))?;
                manifest.outputs.push(display(&path));
                named.push(report.named);
            }
            named
        }
        (None, Some(coeffs)) => {
            manifest.inputs.push(display(coeffs));
            let file = fs::File::open(coeffs).map_err(|e| io_error(coeffs, e))?;
            read_named_block(file)?
        }
        (None, None) => return Err(CliError::Config("one of --data or --coefficients is required".into())),
    };
    manifest.inputs.extend(args.scores.iter().map(|p| display(p)));
    let fidelity = comparisons(&args.scores)?;
    let thresholds = FlagThresholds {
        threshold: args.threshold,
        fidelity_gap: args.fidelity_gap,
    };
    let flags = flag_crosstalk(&named, &fidelity, thresholds)?;

    let block = out.join("coefficients.csv");
    let file = fs::File::create(&block).map_err(|e| io_error(&block, e))?;
    write_named_block(&named, BufWriter::new(file))?;
    manifest.outputs.push(display(&block));

    let flag_path = out.join("flags.csv");
    let mut text = String::from("pair,evidence\n");
    for f in &flags {
        for e in &f.evidence {
            text.push_str(&format!("{}-{},{e}\n", f.pair.0, f.pair.1));
        }
    }
    fs::write(&flag_path, text).map_err(|e| io_error(&flag_path, e))?;
    manifest.outputs.push(display(&flag_path));

    manifest.param("threshold", args.threshold);
    manifest.param("fidelity_gap", args.fidelity_gap);
    manifest.write(&out.join("crosstalk.manifest.toml"))?;
    Ok(out)
}

/// Parses `lo:hi` (every integer) or `lo:hi:count` (log-spaced).
pub fn parse_range(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Config(format!("range {s:?} must be lo:hi or lo:hi:count with 1 <= lo <= hi"));
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    match parts[..] {
        [lo, hi] if 1 <= lo && lo <= hi => Ok((lo..=hi).collect()),
        [lo, hi, count] if 1 <= lo && lo <= hi && count >= 1 => Ok(log_range(lo, hi, count)),
        _ => Err(bad()),
    }
}

pub fn cmd_complexity(args: &ComplexityArgs) -> CliResult<PathBuf> {
    let mut manifest = RunManifest::new("complexity", None);
    let spec = CurveSpec {
        n_values: parse_range(&args.n_range)?,
        f_values: parse_range(&args.f_range)?,
        fixed_n: args.n,
        fixed_f: args.f,
        k: args.k,
        i: args.i,
        c: args.c,
    };
    let curves = generate_curves(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let out = args.out.clone().unwrap_or_else(|| args.dir.out_dir.join("complexity"));
    fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    for curve in &curves {
        let path = out.join(format!("{}.csv", curve.file_stem()));
        let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        curve.write_csv(BufWriter::new(file))?;
        manifest.outputs.push(display(&path));
    }
    for (k, v) in [
        ("n_range", args.n_range.clone()),
        ("f_range", args.f_range.clone()),
        ("n", args.n.to_string()),
        ("f", args.f.to_string()),
        ("k", args.k.to_string()),
        ("i", args.i.to_string()),
        ("c", args.c.to_string()),
    ] {
        manifest.param(k, v);
    }
    manifest.write(&out.join("complexity.manifest.toml"))?;
    Ok(out)
}

pub fn run(cli: &Cli) -> CliResult<PathBuf> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Crosstalk(a) => cmd_crosstalk(a),
        Command::Complexity(a) => cmd_complexity(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(path) => {
            println!("{}", path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
