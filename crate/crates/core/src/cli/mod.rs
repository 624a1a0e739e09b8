//! The `dam` command line.

pub mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifier::{classify_action, train_model, ClassModel};
use crate::dataset::{self, action3d, msrc12, parse_action_file, Dataset, Protocol};
use crate::eval::{self, report, AggregateResult, ClustererKind, ExperimentConfig};

pub use config::{parse_grid, ActionSetFile, CliConfig};

#[derive(Debug, Parser)]
#[command(
    name = "dam",
    version,
    about = "Skeleton action recognition from direction-frame histograms"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a raw dataset to canonical `.action` files.
    Convert(ConvertArgs),
    /// Train a model on a canonical dataset directory.
    Train(TrainArgs),
    /// Classify canonical action files with a trained model.
    Classify(ClassifyArgs),
    /// Run the evaluation protocol and write result tables.
    Evaluate(EvaluateArgs),
    /// Evaluate over a grid of window sizes and codebook shapes.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Action3d,
    Msrc12,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub format: InputFormat,
    #[arg(long, value_name = "DIR")]
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub output: PathBuf,
    /// MSRC-12 column layout (TOML).
    #[arg(long, value_name = "FILE")]
    pub layout: Option<PathBuf>,
}

/// Options shared by the commands that train codebooks. Flags override the
/// config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, env = "DAM_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "F")]
    pub frames: Option<usize>,
    #[arg(long, value_name = "W")]
    pub window: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Codebook shape, e.g. `25x25`.
    #[arg(long, value_name = "ROWSxCOLS", value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, value_parser = parse_clusterer)]
    pub clusterer: Option<ClustererKind>,
    #[arg(long, value_name = "FILE")]
    pub action_sets: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    pub action_set: Option<String>,
    /// Ignore `exclude.txt` in the data directory.
    #[arg(long)]
    pub no_exclude: bool,
}

fn parse_clusterer(s: &str) -> Result<ClustererKind, String> {
    match s {
        "som" => Ok(ClustererKind::Som),
        "kmeans" => Ok(ClustererKind::Kmeans),
        _ => Err(format!("unknown clusterer {s:?} (expected som or kmeans)")),
    }
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    match s {
        "cross-subject" => Ok(Protocol::CrossSubject),
        "loso" => Ok(Protocol::Loso),
        _ => Err(format!(
            "unknown protocol {s:?} (expected cross-subject or loso)"
        )),
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Model file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[arg(required = true, value_name = "ACTION")]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_protocol)]
    pub protocol: Option<Protocol>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_protocol)]
    pub protocol: Option<Protocol>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Comma-separated window sizes.
    #[arg(long, value_delimiter = ',')]
    pub windows: Option<Vec<usize>>,
    /// Comma-separated codebook shapes.
    #[arg(long, value_delimiter = ',', value_parser = parse_grid)]
    pub grids: Option<Vec<(usize, usize)>>,
    /// Sweep every set of the action-set file instead of one.
    #[arg(long)]
    pub all_sets: bool,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

impl ExperimentArgs {
    /// Reads the config file, if any, and applies the flags on top.
    pub fn resolve(&self) -> anyhow::Result<CliConfig> {
        let mut cfg = match &self.config {
            Some(path) => CliConfig::load(path)?,
            None => CliConfig::default(),
        };
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        let p = &mut cfg.preprocess;
        p.frames = self.frames.unwrap_or(p.frames);
        p.window = self.window.unwrap_or(p.window);
        p.smoothing_sigma = self.sigma.unwrap_or(p.smoothing_sigma);
        p.smoothing_radius = self.radius.unwrap_or(p.smoothing_radius);
        let cb = &mut cfg.codebook;
        if let Some((r, c)) = self.grid {
            cb.rows = r;
            cb.cols = c;
        }
        cb.epochs = self.epochs.unwrap_or(cb.epochs);
        cb.clusterer = self.clusterer.unwrap_or(cb.clusterer);
        if self.action_sets.is_some() {
            cfg.data.action_sets = self.action_sets.clone();
        }
        if self.action_set.is_some() {
            cfg.data.action_set = self.action_set.clone();
        }
        if self.no_exclude {
            cfg.data.use_exclusions = false;
        }
        Ok(cfg)
    }
}

/// Parses the process arguments, runs the command and reports errors on a
/// single stderr line.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return ExitCode::FAILURE;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Convert(a) => convert(&a, &mut out),
        Command::Train(a) => train(&a, &mut out),
        Command::Classify(a) => classify(&a, &mut out),
        Command::Evaluate(a) => evaluate(&a, &mut out),
        Command::Sweep(a) => sweep(&a, &mut out),
    }
}

pub fn convert(args: &ConvertArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let ds = match args.format {
        InputFormat::Action3d => action3d::load_msr_action3d(&args.input)?,
        InputFormat::Msrc12 => {
            let layout = match &args.layout {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    toml::from_str(&text)
                        .map_err(|e| anyhow!("{}: {}", path.display(), e.message()))?
                }
                None => msrc12::Msrc12Layout::default(),
            };
            msrc12::load_msrc12(&args.input, &layout)?
        }
    };
    dataset::write_dir(&ds, &args.output)?;
    let exclude = args.input.join(dataset::EXCLUDE_FILE);
    if exclude.is_file() {
        let dest = args.output.join(dataset::EXCLUDE_FILE);
        fs::copy(&exclude, &dest).with_context(|| format!("copying {}", exclude.display()))?;
    }
    writeln!(
        out,
        "converted {} actions: {} classes, {} subjects",
        ds.len(),
        ds.class_set().len(),
        ds.subject_set().len()
    )?;
    let mut per_class = vec![0usize; ds.class_set().len()];
    let mut per_subject = vec![0usize; ds.subject_set().len()];
    for a in ds.actions() {
        per_class[ds
            .class_set()
            .iter()
            .position(|c| *c == a.class_label)
            .expect("known class")] += 1;
        per_subject[ds
            .subject_set()
            .binary_search(&a.subject)
            .expect("known subject")] += 1;
    }
    let counts = |names: Vec<String>, n: &[usize]| {
        names
            .iter()
            .zip(n)
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(
        out,
        "classes: {}",
        counts(ds.class_set().to_vec(), &per_class)
    )?;
    let subjects = ds.subject_set().iter().map(u32::to_string).collect();
    writeln!(out, "subjects: {}", counts(subjects, &per_subject))?;
    Ok(())
}

fn load_data(dir: &Path, cfg: &CliConfig) -> anyhow::Result<Dataset> {
    Ok(dataset::load_dir(dir, cfg.data.use_exclusions)?)
}

pub fn train(args: &TrainArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let cfg = args.experiment.resolve()?;
    let exp = cfg.experiment()?;
    let mut ds = load_data(&args.data, &cfg)?;
    if let Some(classes) = &exp.action_set {
        ds = dataset::filter_action_set(&ds, classes)?.dataset;
    }
    let clusterer = exp.clusterer(exp.split.seed);
    let model = train_model(&ds, exp.preprocess, clusterer.as_ref())?;
    model.save(&args.out)?;
    writeln!(
        out,
        "trained on {} actions: {} classes, K={}, wrote {}",
        ds.len(),
        model.classes().len(),
        exp.k(),
        args.out.display()
    )?;
    Ok(())
}

pub fn classify(args: &ClassifyArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let model = ClassModel::load(&args.model)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "predicted".to_string()];
    header.extend(model.classes().iter().cloned());
    w.write_record(&header)?;
    for path in &args.files {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let action = parse_action_file(&text).map_err(|e| e.in_file(path))?;
        let posterior =
            classify_action(&model, &action).with_context(|| path.display().to_string())?;
        let mut record = vec![
            action.id.clone(),
            model.classes()[posterior.predicted].clone(),
        ];
        record.extend(
            posterior
                .normalized()
                .iter()
                .map(|&p| report::format_sig(p, 6)),
        );
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn apply_eval_flags(cfg: &mut CliConfig, protocol: Option<Protocol>, runs: Option<usize>) {
    cfg.evaluation.protocol = protocol.unwrap_or(cfg.evaluation.protocol);
    cfg.evaluation.runs = runs.unwrap_or(cfg.evaluation.runs);
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_tables(dir: &Path, agg: &AggregateResult, exp: &ExperimentConfig) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    report::write_results(
        create(&dir.join("results.csv"))?,
        agg,
        exp.preprocess.window,
        exp.k(),
    )?;
    report::write_class_matrix(
        create(&dir.join("confusion.csv"))?,
        &agg.classes,
        &agg.mean_confusion,
    )?;
    report::write_class_matrix(
        create(&dir.join("probmatrix.csv"))?,
        &agg.classes,
        &agg.mean_prob_matrix,
    )?;
    report::write_per_subject(create(&dir.join("per_subject.csv"))?, &agg.per_subject)?;
    Ok(())
}

fn summary(agg: &AggregateResult, exp: &ExperimentConfig) -> String {
    let protocol = match exp.split.protocol {
        Protocol::CrossSubject => "cross-subject",
        Protocol::Loso => "loso",
    };
    format!(
        "accuracy {:.2}% ± {:.2}% over {} {protocol} runs (W={}, K={})",
        100.0 * agg.mean,
        100.0 * agg.std_dev,
        agg.runs.len(),
        exp.preprocess.window,
        exp.k()
    )
}

pub fn evaluate(args: &EvaluateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut cfg = args.experiment.resolve()?;
    apply_eval_flags(&mut cfg, args.protocol, args.runs);
    let exp = cfg.experiment()?;
    let ds = load_data(&args.data, &cfg)?;
    let agg = eval::run_protocol(&ds, &exp)?;
    write_tables(&args.out, &agg, &exp)?;
    writeln!(out, "{}", summary(&agg, &exp))?;

    // With an exclusion list, also report the full dataset for comparison.
    let excluded = cfg.data.use_exclusions
        && dataset::read_exclusions(&args.data)?.is_some_and(|ids| !ids.is_empty());
    if excluded {
        let full = dataset::load_dir(&args.data, false)?;
        if full.len() != ds.len() {
            let agg = eval::run_protocol(&full, &exp)?;
            write_tables(&args.out.join("unexcluded"), &agg, &exp)?;
            writeln!(out, "without exclusions: {}", summary(&agg, &exp))?;
        }
    }
    Ok(())
}

pub fn sweep(args: &SweepArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut cfg = args.experiment.resolve()?;
    apply_eval_flags(&mut cfg, args.protocol, args.runs);
    if let Some(w) = &args.windows {
        cfg.sweep.windows = w.clone();
    }
    let grids = match &args.grids {
        Some(g) => g.clone(),
        None => cfg.sweep_grids()?,
    };
    if cfg.sweep.windows.is_empty() || grids.is_empty() {
        bail!("invalid configuration: sweep: needs at least one window and one grid");
    }
    let sets = if args.all_sets {
        let sets = cfg.action_sets()?;
        if sets.is_empty() {
            bail!("invalid configuration: data.action_sets: --all-sets needs an action-set file");
        }
        sets
    } else {
        Vec::new()
    };
    let exp = cfg.experiment()?;
    let ds = load_data(&args.data, &cfg)?;
    let table = eval::parameter_sweep(&ds, &exp, &cfg.sweep.windows, &grids, &sets)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    report::write_sweep(create(&args.out.join("sweep.csv"))?, &table)?;
    for r in table.rows.iter().chain(&table.set_means) {
        writeln!(
            out,
            "{:>6}  W={:<2} {}x{} (K={:<4}) {:6.2}% ± {:.2}%",
            r.set,
            r.window,
            r.rows,
            r.cols,
            r.k,
            100.0 * r.mean,
            100.0 * r.std_dev
        )?;
    }
    Ok(())
}
