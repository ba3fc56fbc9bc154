//! `equicast`: command-line pipeline for long-horizon equity movement
//! classification.
//!
//! Subcommands cover the whole workflow — `schema` documents the file
//! formats, `synth` writes benchmark snapshot files, `label` turns
//! snapshots into a Good/Bad dataset, `balance` equalizes class counts,
//! `train` fits and saves a model, `evaluate` runs stratified k-fold
//! cross-validation (optionally comparing two algorithms on identical
//! folds), `select-features` runs greedy backward elimination, and
//! `predict` scores snapshots with a saved model.
//!
//! Every random choice flows from `--seed` through tagged derived
//! streams, so identical command lines produce byte-identical artifacts
//! at any `--threads` setting.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand};

use equicast_core::evaluation::ttest::{paired_t_test, TTestError};
use equicast_core::evaluation::{
    cross_validate_with_folds, render_human_table, render_machine_report, stratified_folds,
    EvalError, EvalReport, FoldAssignment,
};
use equicast_core::feature_selection::{backward_eliminate, SelectionError};
use equicast_core::labeling::{
    balance, build_dataset, read_labeled, write_labeled, BuildOptions, LabeledFileError,
    LabelingError,
};
use equicast_core::learners::{train, TrainError};
use equicast_core::model_io::{dataset_digest, load_model, save_model, ModelIoError, ModelMetadata};
use equicast_core::snapshot::{parse_snapshots, write_snapshots, SchemaConfig, SnapshotParseError};
use equicast_core::synth::{
    comparison_profile, default_profile, generate, selection_profile, SynthConfig, SynthError,
};
use equicast_core::{
    registry, seeds, Algorithm, FeatureSet, LabeledDataset, LearnerSpec, Quarter, StockSnapshot,
    SENTINEL,
};

/// Root seed used when `--seed` is absent from both the command line and
/// the config file.
const DEFAULT_SEED: u64 = 42;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successful outcomes; real
            // argument problems are usage errors.
            if err.use_stderr() {
                eprint!("{err}");
                std::process::exit(1);
            }
            print!("{err}");
            std::process::exit(0);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {}", err.message());
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Schema(args) => cmd_schema(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Label(args) => cmd_label(args),
        Command::Balance(args) => cmd_balance(args),
        Command::Train(args) => cmd_train(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::SelectFeatures(args) => cmd_select_features(args),
        Command::Predict(args) => cmd_predict(args),
    }
}

// ---------------------------------------------------------------------------
// Command-line surface

#[derive(Parser)]
#[command(
    name = "equicast",
    version,
    about = "Long-horizon equity movement classification pipeline",
    after_help = "Exit codes: 0 success, 1 usage, 2 input/parse, 3 labeling, \
                  4 training, 5 evaluation, 6 I/O."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the snapshot and labeled-dataset file schemas
    Schema(SchemaArgs),
    /// Generate a synthetic snapshot file from a benchmark profile
    Synth(SynthArgs),
    /// Label snapshots Good/Bad by price growth over a horizon
    Label(LabelArgs),
    /// Equalize class counts by downsampling the majority class
    Balance(BalanceArgs),
    /// Train a classifier and save it as a model file
    Train(TrainArgs),
    /// Cross-validate a classifier and report precision/recall/F
    Evaluate(EvaluateArgs),
    /// Greedy backward feature elimination under cross-validation
    SelectFeatures(SelectFeaturesArgs),
    /// Score snapshots with a saved model
    Predict(PredictArgs),
}

/// Flags shared across subcommands. Any of them may also appear in the
/// `--config` file as `key=value` lines; explicit command-line flags win.
#[derive(Args, Debug, Clone, Default)]
struct Shared {
    /// Input file path
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file path
    #[arg(long)]
    output: Option<PathBuf>,
    /// Feature-list file: one feature id per line, `#` comments allowed
    #[arg(long)]
    features: Option<PathBuf>,
    /// Learner: c45_tree, random_tree, random_forest, naive_bayes, logistic
    #[arg(long)]
    algo: Option<String>,
    /// Relative growth a Good label requires [default: 0.10]
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    /// Label horizon in quarters [default: 4]
    #[arg(long)]
    horizon: Option<u32>,
    /// Number of cross-validation folds [default: 10]
    #[arg(long)]
    k: Option<usize>,
    /// Root random seed [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads; never changes results
    #[arg(long)]
    threads: Option<usize>,
    /// Flat key=value config file mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Learner hyperparameter as name=value (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct SchemaArgs {
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    shared: Shared,
    /// Benchmark profile: default, comparison, or selection
    #[arg(long, default_value = "default")]
    profile: String,
    /// Override the profile's stock count
    #[arg(long)]
    stocks: Option<usize>,
    /// Override the profile's quarter count
    #[arg(long)]
    quarters: Option<usize>,
    /// Override the first history quarter, e.g. 2014Q1
    #[arg(long)]
    start: Option<String>,
    /// Override the profile's missing-value rate
    #[arg(long)]
    missing_rate: Option<f64>,
    /// Override the profile's return-noise standard deviation
    #[arg(long)]
    noise_std: Option<f64>,
}

#[derive(Args)]
struct LabelArgs {
    #[command(flatten)]
    shared: Shared,
    /// Label Good only when growth strictly exceeds the threshold
    #[arg(long)]
    strict_boundary: bool,
}

#[derive(Args)]
struct BalanceArgs {
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    shared: Shared,
    /// Train on the input as-is instead of balancing it first
    #[arg(long, action = ArgAction::SetTrue)]
    no_balance: bool,
    /// Also write the balanced training set to this path
    #[arg(long)]
    write_balanced: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    shared: Shared,
    /// Evaluate the input as-is instead of balancing it first
    #[arg(long, action = ArgAction::SetTrue)]
    no_balance: bool,
    /// Also write the balanced dataset to this path
    #[arg(long)]
    write_balanced: Option<PathBuf>,
    /// Second learner to evaluate on identical folds
    #[arg(long)]
    compare: Option<String>,
    /// Significance level for the paired t-test
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SelectFeaturesArgs {
    #[command(flatten)]
    shared: Shared,
    /// Select over the input as-is instead of balancing it first
    #[arg(long, action = ArgAction::SetTrue)]
    no_balance: bool,
    /// Also write the balanced dataset to this path
    #[arg(long)]
    write_balanced: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    shared: Shared,
    /// Saved model file to score with
    #[arg(long)]
    model: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Errors and exit codes

enum CliError {
    Usage(String),
    Input(String),
    Labeling(String),
    Training(String),
    Evaluation(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Labeling(_) => 3,
            CliError::Training(_) => 4,
            CliError::Evaluation(_) => 5,
            CliError::Io(_) => 6,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Input(m)
            | CliError::Labeling(m)
            | CliError::Training(m)
            | CliError::Evaluation(m)
            | CliError::Io(m) => m,
        }
    }
}

fn io_err(path: &Path, err: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {err}", path.display()))
}

fn input_err(path: &Path, err: impl fmt::Display) -> CliError {
    CliError::Input(format!("{}: {err}", path.display()))
}

impl From<LabelingError> for CliError {
    fn from(err: LabelingError) -> Self {
        CliError::Labeling(err.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(err: TrainError) -> Self {
        CliError::Training(err.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(err: SynthError) -> Self {
        CliError::Usage(err.to_string())
    }
}

impl From<TTestError> for CliError {
    fn from(err: TTestError) -> Self {
        CliError::Evaluation(err.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(err: EvalError) -> Self {
        // A training failure inside cross-validation is a training
        // problem; everything else is an evaluation problem.
        match err {
            EvalError::Training { .. } => CliError::Training(err.to_string()),
            other => CliError::Evaluation(other.to_string()),
        }
    }
}

impl From<SelectionError> for CliError {
    fn from(err: SelectionError) -> Self {
        match err {
            SelectionError::FullSet {
                source: EvalError::Training { .. },
            }
            | SelectionError::Candidate {
                source: EvalError::Training { .. },
                ..
            } => CliError::Training(err.to_string()),
            other => CliError::Evaluation(other.to_string()),
        }
    }
}

fn model_err(path: &Path, err: ModelIoError) -> CliError {
    match err {
        ModelIoError::Io(inner) => io_err(path, inner),
        other => input_err(path, other),
    }
}

// ---------------------------------------------------------------------------
// Shared-flag resolution

/// Shared flags after the config file has been merged in.
struct Resolved {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    features: Option<PathBuf>,
    algo: Option<String>,
    /// `None` when neither the command line nor the config set it;
    /// `synth` then keeps the profile's own threshold.
    threshold: Option<f64>,
    horizon: u32,
    k: usize,
    seed: u64,
    params: Vec<String>,
}

impl Shared {
    /// Merges the config file (if any), applies defaults, and installs
    /// the thread cap. Command-line flags override file values; `param`
    /// lines from the file apply before command-line `--param`s so the
    /// command line wins on conflicts.
    fn resolve(self) -> Result<Resolved, CliError> {
        let mut merged = self;
        if let Some(path) = merged.config.take() {
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let mut file_params = Vec::new();
            for (line_no, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!(
                        "{}:{}: expected key=value, got `{line}`",
                        path.display(),
                        line_no + 1
                    ))
                })?;
                let (key, value) = (key.trim(), value.trim());
                let parsed = |what: &str, v: &str, e: &dyn fmt::Display| {
                    CliError::Usage(format!(
                        "{}:{}: invalid {what} `{v}`: {e}",
                        path.display(),
                        line_no + 1
                    ))
                };
                match key {
                    "input" => {
                        merged.input.get_or_insert_with(|| value.into());
                    }
                    "output" => {
                        merged.output.get_or_insert_with(|| value.into());
                    }
                    "features" => {
                        merged.features.get_or_insert_with(|| value.into());
                    }
                    "algo" => {
                        merged.algo.get_or_insert_with(|| value.to_string());
                    }
                    "threshold" => {
                        let v = value.parse().map_err(|e| parsed("threshold", value, &e))?;
                        merged.threshold.get_or_insert(v);
                    }
                    "horizon" => {
                        let v = value.parse().map_err(|e| parsed("horizon", value, &e))?;
                        merged.horizon.get_or_insert(v);
                    }
                    "k" => {
                        let v = value.parse().map_err(|e| parsed("k", value, &e))?;
                        merged.k.get_or_insert(v);
                    }
                    "seed" => {
                        let v = value.parse().map_err(|e| parsed("seed", value, &e))?;
                        merged.seed.get_or_insert(v);
                    }
                    "threads" => {
                        let v = value.parse().map_err(|e| parsed("threads", value, &e))?;
                        merged.threads.get_or_insert(v);
                    }
                    "param" => {
                        file_params.push(value.to_string());
                    }
                    other => {
                        return Err(CliError::Usage(format!(
                            "{}:{}: unknown config key `{other}`",
                            path.display(),
                            line_no + 1
                        )));
                    }
                }
            }
            file_params.extend(std::mem::take(&mut merged.params));
            merged.params = file_params;
        }

        if let Some(threads) = merged.threads {
            if threads == 0 {
                return Err(CliError::Usage("--threads must be at least 1".to_string()));
            }
            // The pool is process-global; results never depend on it.
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
        }

        Ok(Resolved {
            input: merged.input,
            output: merged.output,
            features: merged.features,
            algo: merged.algo,
            threshold: merged.threshold,
            horizon: merged.horizon.unwrap_or(4),
            k: merged.k.unwrap_or(10),
            seed: merged.seed.unwrap_or(DEFAULT_SEED),
            params: merged.params,
        })
    }
}

impl Resolved {
    fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(0.10)
    }

    fn require_input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Usage("--input is required".to_string()))
    }

    fn require_output(&self) -> Result<&Path, CliError> {
        self.output
            .as_deref()
            .ok_or_else(|| CliError::Usage("--output is required".to_string()))
    }

    fn require_algo(&self) -> Result<Algorithm, CliError> {
        let name = self
            .algo
            .as_deref()
            .ok_or_else(|| CliError::Usage("--algo is required".to_string()))?;
        name.parse()
            .map_err(|e| CliError::Usage(format!("--algo: {e}")))
    }

    /// Builds the learner spec for this invocation: the named algorithm,
    /// a trainer stream derived from the root seed, and every `--param`
    /// applied in order.
    fn learner_spec(&self, algo: Algorithm, stream_index: u64) -> Result<LearnerSpec, CliError> {
        let mut spec = LearnerSpec::new(algo, seeds::derive(self.seed, "train", stream_index));
        for param in &self.params {
            let (name, value) = param.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--param: expected name=value, got `{param}`"))
            })?;
            spec.set_param(name.trim(), value.trim())
                .map_err(|e| CliError::Usage(format!("--param {name}: {e}")))?;
        }
        Ok(spec)
    }

    /// Reads the `--features` file into a feature set, if given.
    fn feature_set(&self) -> Result<Option<FeatureSet>, CliError> {
        let Some(path) = self.features.as_deref() else {
            return Ok(None);
        };
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let names: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let set = FeatureSet::from_names(&names).map_err(|e| input_err(path, e))?;
        Ok(Some(set))
    }
}

// ---------------------------------------------------------------------------
// File plumbing

fn read_snapshots_file(path: &Path) -> Result<Vec<StockSnapshot>, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let (snapshots, diagnostics) = parse_snapshots(file, &SchemaConfig::default())
        .map_err(|e: SnapshotParseError| input_err(path, e))?;
    for d in &diagnostics {
        eprintln!("warning: {}: skipped {d}", path.display());
    }
    Ok(snapshots)
}

fn read_labeled_file(path: &Path) -> Result<LabeledDataset, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let (dataset, diagnostics) = read_labeled(file, &SchemaConfig::default())
        .map_err(|e: LabeledFileError| input_err(path, e))?;
    for d in &diagnostics {
        eprintln!("warning: {}: skipped {d}", path.display());
    }
    Ok(dataset)
}

fn write_labeled_file(path: &Path, dataset: &LabeledDataset) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_labeled(file, dataset, &SchemaConfig::default()).map_err(|e| io_err(path, e))
}

/// Projects to the `--features` set (if any), then balances unless told
/// not to, writing the balanced artifact when asked. Returns the dataset
/// ready for training or evaluation.
fn prepare_dataset(
    resolved: &Resolved,
    raw: LabeledDataset,
    no_balance: bool,
    write_balanced: Option<&Path>,
) -> Result<LabeledDataset, CliError> {
    let projected = match resolved.feature_set()? {
        Some(set) => raw.project(&set),
        None => raw,
    };
    let (good, bad) = projected.class_counts();
    if no_balance {
        println!("examples {} (good {good}, bad {bad}), not balanced", projected.len());
        return Ok(projected);
    }
    let balanced = balance(&projected, resolved.seed)?;
    println!(
        "examples {} (good {good}, bad {bad}) balanced to {}",
        projected.len(),
        balanced.len()
    );
    if let Some(path) = write_balanced {
        write_labeled_file(path, &balanced)?;
        println!("wrote balanced dataset to {}", path.display());
    }
    Ok(balanced)
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_schema(args: SchemaArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let mut out = String::new();
    out.push_str("snapshot file: delimited text (comma) with a header row\n");
    out.push_str("reserved columns:\n");
    out.push_str("  ticker         stock identifier (required)\n");
    out.push_str("  year           calendar year of the snapshot quarter (required)\n");
    out.push_str("  quarter        quarter of year, 1..4 (required)\n");
    out.push_str("  history_price  share price at the snapshot quarter (required, positive)\n");
    out.push_str("  future_price   share price four quarters later (optional, positive)\n");
    out.push_str(&format!(
        "indicator columns ({}; cells may be empty or {} for missing):\n",
        registry().len(),
        SENTINEL
    ));
    let width = registry()
        .entries()
        .iter()
        .map(|e| e.id.len())
        .max()
        .unwrap_or(0);
    for entry in registry().entries() {
        out.push_str(&format!(
            "  {:width$}  {:8}  {}\n",
            entry.id,
            entry.unit.as_str(),
            entry.description
        ));
    }
    out.push_str("\nlabeled file: feature columns in canonical order, then label, ticker, year, quarter\n");
    out.push_str(&format!(
        "feature ids: the {} indicator ids plus history_price\n",
        registry().len()
    ));
    match resolved.output.as_deref() {
        Some(path) => {
            fs::write(path, out).map_err(|e| io_err(path, e))?;
            println!("wrote schema to {}", path.display());
        }
        None => print!("{out}"),
    }
    Ok(())
}

fn profile_by_name(name: &str) -> Result<SynthConfig, CliError> {
    match name {
        "default" => Ok(default_profile()),
        "comparison" => Ok(comparison_profile()),
        "selection" => Ok(selection_profile()),
        other => Err(CliError::Usage(format!(
            "unknown profile `{other}`; expected default, comparison, or selection"
        ))),
    }
}

fn parse_start_quarter(text: &str) -> Result<Quarter, CliError> {
    let bad = || CliError::Usage(format!("--start: expected YYYYQN (e.g. 2014Q1), got `{text}`"));
    let (year, q) = text.split_once(['Q', 'q']).ok_or_else(bad)?;
    let year: i32 = year.parse().map_err(|_| bad())?;
    let q: u8 = q.parse().map_err(|_| bad())?;
    Quarter::new(year, q).map_err(|_| bad())
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let output = resolved.require_output()?;
    let mut config = profile_by_name(&args.profile)?;
    if let Some(stocks) = args.stocks {
        config.n_stocks = stocks;
    }
    if let Some(quarters) = args.quarters {
        config.n_quarters = quarters;
    }
    if let Some(start) = args.start.as_deref() {
        config.start_quarter = parse_start_quarter(start)?;
    }
    if let Some(rate) = args.missing_rate {
        config.missing_rate = rate;
    }
    if let Some(noise) = args.noise_std {
        config.noise_std = noise;
    }
    if let Some(threshold) = resolved.threshold {
        config.threshold = threshold;
    }
    let snapshots = generate(&config, resolved.seed)?;
    let file = fs::File::create(output).map_err(|e| io_err(output, e))?;
    write_snapshots(file, &snapshots, &SchemaConfig::default()).map_err(|e| io_err(output, e))?;
    println!(
        "wrote {} snapshots ({} stocks x {} quarters, profile {}) to {}",
        snapshots.len(),
        config.n_stocks,
        config.n_quarters,
        args.profile,
        output.display()
    );
    Ok(())
}

fn cmd_label(args: LabelArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let input = resolved.require_input()?;
    let output = resolved.require_output()?;
    let snapshots = read_snapshots_file(input)?;
    let features = resolved.feature_set()?.unwrap_or_else(FeatureSet::full);
    let options = BuildOptions {
        horizon_quarters: resolved.horizon,
        threshold: resolved.threshold(),
        strict_boundary: args.strict_boundary,
    };
    let outcome = build_dataset(&snapshots, &features, &options)?;
    write_labeled_file(output, &outcome.dataset)?;
    let (good, bad) = outcome.dataset.class_counts();
    println!(
        "labeled {} rows (good {good}, bad {bad}); dropped {} without a horizon price; wrote {}",
        outcome.dataset.len(),
        outcome.dropped,
        output.display()
    );
    Ok(())
}

fn cmd_balance(args: BalanceArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let input = resolved.require_input()?;
    let output = resolved.require_output()?;
    let dataset = read_labeled_file(input)?;
    let (good, bad) = dataset.class_counts();
    let balanced = balance(&dataset, resolved.seed)?;
    write_labeled_file(output, &balanced)?;
    let (bgood, bbad) = balanced.class_counts();
    println!(
        "balanced {} rows (good {good}, bad {bad}) to {} rows (good {bgood}, bad {bbad}); wrote {}",
        dataset.len(),
        balanced.len(),
        output.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let input = resolved.require_input()?;
    let output = resolved.require_output()?;
    let algo = resolved.require_algo()?;
    let spec = resolved.learner_spec(algo, 0)?;
    let raw = read_labeled_file(input)?;
    let dataset = prepare_dataset(&resolved, raw, args.no_balance, args.write_balanced.as_deref())?;
    let model = train(&spec, &dataset)?;
    let metadata = ModelMetadata::new(spec.seed, dataset_digest(&dataset));
    let digest = save_model(&model, &metadata, output).map_err(|e| model_err(output, e))?;
    println!("trained {algo} on {} examples", dataset.len());
    println!("wrote model to {} (digest {digest})", output.display());
    Ok(())
}

/// Runs one algorithm over a fixed fold assignment.
fn evaluate_on_folds(
    resolved: &Resolved,
    algo: Algorithm,
    stream_index: u64,
    dataset: &LabeledDataset,
    folds: &FoldAssignment,
) -> Result<EvalReport, CliError> {
    let spec = resolved.learner_spec(algo, stream_index)?;
    Ok(cross_validate_with_folds(&spec, dataset, folds, resolved.seed)?)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let input = resolved.require_input()?;
    let algo = resolved.require_algo()?;
    if !(args.alpha.is_finite() && 0.0 < args.alpha && args.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must lie strictly between 0 and 1, got {}",
            args.alpha
        )));
    }
    let raw = read_labeled_file(input)?;
    let dataset = prepare_dataset(&resolved, raw, args.no_balance, args.write_balanced.as_deref())?;
    let folds = stratified_folds(&dataset, resolved.k, resolved.seed)?;
    let report = evaluate_on_folds(&resolved, algo, 0, &dataset, &folds)?;
    if let Some(path) = resolved.output.as_deref() {
        fs::write(path, render_machine_report(&report)).map_err(|e| io_err(path, e))?;
        println!("wrote report to {}", path.display());
    }
    match args.compare.as_deref() {
        None => print!("{}", render_human_table(&[&report])),
        Some(name) => {
            let other_algo: Algorithm = name
                .parse()
                .map_err(|e| CliError::Usage(format!("--compare: {e}")))?;
            let other = evaluate_on_folds(&resolved, other_algo, 1, &dataset, &folds)?;
            print!("{}", render_human_table(&[&report, &other]));
            let test = paired_t_test(&report.fold_f_scores, &other.fold_f_scores, args.alpha)?;
            println!(
                "paired t-test on per-fold F ({algo} vs {other_algo}): t {} p {} -> {} at alpha {}",
                test.t,
                test.p,
                if test.significant { "significant" } else { "not significant" },
                args.alpha
            );
        }
    }
    Ok(())
}

fn cmd_select_features(args: SelectFeaturesArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let input = resolved.require_input()?;
    let algo = resolved.require_algo()?;
    let spec = resolved.learner_spec(algo, 0)?;
    let raw = read_labeled_file(input)?;
    let dataset = prepare_dataset(&resolved, raw, args.no_balance, args.write_balanced.as_deref())?;
    let result = backward_eliminate(&dataset, &spec, resolved.k, resolved.seed)?;
    for (i, step) in result.trace.iter().enumerate() {
        println!(
            "step {}: remove {} -> f_score {} (was {}): {}",
            i + 1,
            step.candidate.name(),
            step.score_after,
            step.score_before,
            if step.accepted { "accepted" } else { "rejected, stopping" }
        );
    }
    println!(
        "selected {} of {} features, f_score {}",
        result.selected.len(),
        dataset.features().len(),
        result.final_score
    );
    if let Some(path) = resolved.output.as_deref() {
        let mut text = String::new();
        for name in result.selected.names() {
            text.push_str(name);
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| io_err(path, e))?;
        println!("wrote selected feature list to {}", path.display());
    } else {
        for name in result.selected.names() {
            println!("{name}");
        }
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let resolved = args.shared.resolve()?;
    let input = resolved.require_input()?;
    let model_path = args
        .model
        .as_deref()
        .ok_or_else(|| CliError::Usage("--model is required".to_string()))?;
    let (model, _metadata) = load_model(model_path).map_err(|e| model_err(model_path, e))?;
    let snapshots = read_snapshots_file(input)?;
    let mut out = String::new();
    for snapshot in &snapshots {
        let vector = snapshot.to_feature_vector(model.features());
        let prediction = model.predict(&vector);
        out.push_str(&format!(
            "{},{},{}\n",
            snapshot.ticker,
            prediction.label.as_str(),
            prediction.score
        ));
    }
    match resolved.output.as_deref() {
        Some(path) => {
            fs::write(path, out).map_err(|e| io_err(path, e))?;
            println!("wrote {} predictions to {}", snapshots.len(), path.display());
        }
        None => {
            print!("{out}");
            std::io::stdout().flush().ok();
        }
    }
    Ok(())
}
