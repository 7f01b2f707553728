//! Command-line front end: experiments, θ sweeps, model files and
//! synthetic data.
//!
//! Exit codes: 0 success, 1 data or runtime failure, 2 bad configuration.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierConfig, Outcome, ShadowClassifier};
use crate::data::{load_csv, read_features, write_csv, MinMaxScaler};
use crate::error::{Error, Result};
use crate::evaluation::{
    run_experiment_traced, theta_grid_search, ClassifierKind, CostMatrix, EvaluationReport,
    RunConfig,
};
use crate::granular_ball::SplitMethod;
use crate::granulation::GenerationTrace;
use crate::synth::Synthetic;

#[derive(Debug, Parser)]
#[command(
    name = "shadowgb",
    version,
    about = "Three-way classification with shadowed granular-balls"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cross-validated run, once per noise rate.
    Run(ExperimentArgs),
    /// Grid search over θ, reported as CSV.
    SweepTheta(SweepArgs),
    /// Fit on a whole dataset and save the model as JSON.
    Fit(FitArgs),
    /// Three-way predictions for a CSV of raw feature rows.
    Predict(PredictArgs),
    /// Write a seeded synthetic dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha_step: Option<f64>,
    /// two-means or two-division
    #[arg(long)]
    pub split: Option<SplitMethod>,
}

#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// TOML file with defaults; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// The dataset's first row is a header.
    #[arg(long)]
    pub header: bool,
    /// shadow3wc or gbknn
    #[arg(long)]
    pub classifier: Option<ClassifierKind>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated label noise rates.
    #[arg(long, value_delimiter = ',')]
    pub noise: Option<Vec<f64>>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cost_correct: Option<f64>,
    #[arg(long)]
    pub cost_wrong: Option<f64>,
    #[arg(long)]
    pub cost_defer: Option<f64>,
    /// Output directory (run) or file (sweep-theta).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write the split trace of every fit.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Comma-separated θ values; defaults to 0.1, 0.2, …, 0.9.
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Where to write the model.
    #[arg(long)]
    pub model_path: PathBuf,
    /// Write the split trace to `<model_path>.trace.jsonl`.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_path: PathBuf,
    /// CSV of raw feature rows, no label column.
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// blobs, moons, rings or checkerboard
    #[arg(long)]
    pub kind: Synthetic,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Standard deviation of the coordinate jitter.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Optional settings read from a TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub header: Option<bool>,
    pub classifier: Option<ClassifierKind>,
    pub noise: Option<Vec<f64>>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub trace: Option<bool>,
    pub thetas: Option<Vec<f64>>,
    #[serde(default)]
    pub model: FileModel,
    #[serde(default)]
    pub costs: FileCosts,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileModel {
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha_step: Option<f64>,
    pub split: Option<SplitMethod>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileCosts {
    pub correct: Option<f64>,
    pub wrong: Option<f64>,
    pub defer: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text)
            .map_err(|e| Error::config(format!("{}: {}", path.display(), e.message())))
    }
}

/// Fully resolved settings of one invocation, echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub header: bool,
    pub classifier: ClassifierKind,
    pub model: ClassifierConfig,
    pub noise_rates: Vec<f64>,
    pub fold_count: usize,
    pub seed: u64,
    pub costs: CostMatrix,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub trace: bool,
}

impl ExperimentConfig {
    pub fn run_config(&self, noise_rate: f64) -> RunConfig {
        RunConfig {
            classifier: self.classifier,
            model: self.model,
            noise_rate,
            fold_count: self.fold_count,
            seed: self.seed,
            costs: self.costs,
            jobs: self.jobs,
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_rates.is_empty() {
            return Err(Error::config("at least one noise rate is required"));
        }
        for &r in &self.noise_rates {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::config(format!("noise rate {r} outside [0, 1]")));
            }
        }
        self.run_config(self.noise_rates[0]).validate()
    }
}

fn resolve_model(file: &FileModel, flags: &ModelArgs) -> ClassifierConfig {
    let mut m = ClassifierConfig::default();
    if let Some(t) = flags.theta.or(file.theta) {
        m.generation.theta = t;
    }
    if let Some(s) = flags.split.or(file.split) {
        m.generation.split_method = s;
    }
    if let Some(s) = flags.sigma.or(file.sigma) {
        m.sigma = s;
    }
    if let Some(s) = flags.alpha_step.or(file.alpha_step) {
        m.alpha.grid_step = s;
    }
    m
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    path.map(FileConfig::load)
        .transpose()
        .map(Option::unwrap_or_default)
}

/// Merges defaults, the optional config file and flags, in that order.
pub fn resolve(args: &ExperimentArgs) -> Result<(ExperimentConfig, FileConfig)> {
    let mut file = load_file_config(args.config.as_deref())?;
    let dataset = args
        .dataset
        .clone()
        .or(file.dataset.take())
        .ok_or_else(|| Error::config("--dataset is required"))?;
    let base = RunConfig::default();
    let costs = CostMatrix {
        correct: args
            .cost_correct
            .or(file.costs.correct)
            .unwrap_or(base.costs.correct),
        wrong: args
            .cost_wrong
            .or(file.costs.wrong)
            .unwrap_or(base.costs.wrong),
        defer: args
            .cost_defer
            .or(file.costs.defer)
            .unwrap_or(base.costs.defer),
    };
    let cfg = ExperimentConfig {
        dataset,
        header: args.header || file.header.unwrap_or(false),
        classifier: args.classifier.or(file.classifier).unwrap_or_default(),
        model: resolve_model(&file.model, &args.model),
        noise_rates: args
            .noise
            .clone()
            .or(file.noise.take())
            .unwrap_or_else(|| vec![0.0]),
        fold_count: args.folds.or(file.folds).unwrap_or(base.fold_count),
        seed: args.seed.or(file.seed).unwrap_or(base.seed),
        costs,
        out: args.out.clone().or(file.out.take()),
        jobs: args.jobs.or(file.jobs).unwrap_or(base.jobs),
        trace: args.trace || file.trace.unwrap_or(false),
    };
    cfg.validate()?;
    Ok((cfg, file))
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    config: &'a ExperimentConfig,
    runs: &'a [EvaluationReport],
}

fn create_file(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_trace<W: Write>(mut out: W, fold: Option<usize>, trace: &GenerationTrace) -> Result<()> {
    for step in &trace.steps {
        let mut line = serde_json::to_value(step).map_err(|e| Error::Write(e.into()))?;
        if let Some(k) = fold {
            line["fold"] = k.into();
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn rate_tag(rate: f64) -> String {
    format!("{rate}").replace('.', "_")
}

pub fn cmd_run(args: &ExperimentArgs, stdout: &mut dyn Write) -> Result<()> {
    let (cfg, _) = resolve(args)?;
    let ds = load_csv(&cfg.dataset, cfg.header)?;
    let mut runs = Vec::with_capacity(cfg.noise_rates.len());
    for &rate in &cfg.noise_rates {
        let report = run_experiment_traced(&ds, &cfg.run_config(rate), cfg.trace)?;
        let a = &report.aggregate;
        writeln!(
            stdout,
            "noise={rate} accuracy={:.4} precision={:.4} recall={:.4} f1={:.4} ur={:.4} cost={:.4} balls={:.1}",
            a.accuracy, a.precision, a.recall, a.f1, a.ur, a.cost, a.ball_count
        )?;
        runs.push(report);
    }

    let doc = RunReport {
        config: &cfg,
        runs: &runs,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| Error::Write(e.into()))?;
    match &cfg.out {
        None => writeln!(stdout, "{json}")?,
        Some(dir) => {
            create_dir(dir)?;
            let path = dir.join("report.json");
            let mut f = create_file(&path)?;
            writeln!(f, "{json}")?;
            for report in &runs {
                let tag = rate_tag(report.config.noise_rate);
                report.write_csv(create_file(&dir.join(format!("metrics_noise_{tag}.csv")))?)?;
                if cfg.trace {
                    let mut f = create_file(&dir.join(format!("trace_noise_{tag}.jsonl")))?;
                    for fold in &report.per_fold {
                        if let Some(t) = &fold.trace {
                            write_trace(&mut f, Some(fold.fold), t)?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn default_thetas() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

pub fn cmd_sweep_theta(args: &SweepArgs, stdout: &mut dyn Write) -> Result<()> {
    let (cfg, file) = resolve(&args.experiment)?;
    let thetas = args
        .thetas
        .clone()
        .or(file.thetas)
        .unwrap_or_else(default_thetas);
    if thetas.is_empty() {
        return Err(Error::config("theta grid is empty"));
    }
    if cfg.noise_rates.len() != 1 {
        return Err(Error::config("sweep-theta takes exactly one noise rate"));
    }
    let ds = load_csv(&cfg.dataset, cfg.header)?;
    let search = theta_grid_search(&ds, &thetas, &cfg.run_config(cfg.noise_rates[0]))?;
    match &cfg.out {
        Some(path) => search.write_csv(create_file(path)?)?,
        None => search.write_csv(&mut *stdout)?,
    }
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> Result<ShadowClassifier> {
    let file = load_file_config(args.config.as_deref())?;
    let dataset = args
        .dataset
        .clone()
        .or(file.dataset)
        .ok_or_else(|| Error::config("--dataset is required"))?;
    let model = resolve_model(&file.model, &args.model);
    RunConfig {
        model,
        ..RunConfig::default()
    }
    .validate()?;
    let raw = load_csv(&dataset, args.header || file.header.unwrap_or(false))?;
    let scaler = MinMaxScaler::fit(&raw);
    let (clf, trace) = ShadowClassifier::fit_traced(&scaler.transform(&raw), &model)?;
    let clf = clf.with_scaler(scaler)?;
    let mut f = create_file(&args.model_path)?;
    writeln!(f, "{}", clf.to_json()?)?;
    if args.trace {
        let mut name = args.model_path.clone().into_os_string();
        name.push(".trace.jsonl");
        write_trace(create_file(Path::new(&name))?, None, &trace)?;
    }
    Ok(clf)
}

pub fn load_model(path: &Path) -> Result<ShadowClassifier> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ShadowClassifier::from_json(&text)
}

/// One line per query: `index,label|UNCERTAIN,COR|IMP|UNE`.
pub fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write) -> Result<()> {
    let clf = load_model(&args.model_path)?;
    let file = fs::File::open(&args.queries).map_err(|source| Error::Io {
        path: args.queries.clone(),
        source,
    })?;
    let queries = read_features(file, args.header)?;
    let mut lines = String::new();
    for (i, q) in queries.iter().enumerate() {
        let p = clf.predict_raw(q)?;
        let label = match p.outcome {
            Outcome::Certain(l) => clf.label_names()[l].as_str(),
            Outcome::Uncertain => "UNCERTAIN",
        };
        lines.push_str(&format!("{i},{label},{}\n", p.region.as_str()));
    }
    match &args.out {
        Some(path) => create_file(path)?.write_all(lines.as_bytes())?,
        None => stdout.write_all(lines.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let ds = args.kind.generate(args.n, args.noise, args.seed)?;
    write_csv(&ds, create_file(&args.out)?)
}

pub fn exit_code(err: &Error) -> u8 {
    if err.is_config() {
        2
    } else {
        1
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, stdout),
        Command::SweepTheta(a) => cmd_sweep_theta(a, stdout),
        Command::Fit(a) => cmd_fit(a).map(|_| ()),
        Command::Predict(a) => cmd_predict(a, stdout),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code. Usage errors exit with 2.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
