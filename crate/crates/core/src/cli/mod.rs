//! Command-line driver: training, evaluation, noise sweeps, circuit metrics
//! and attention export. Every command is deterministic for a given config and
//! seed; artifacts carry no timestamps.

mod config;

pub use config::{DatasetSpec, NoiseSpec, RunConfig};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::circmetrics::{metrics_csv, run_metrics};
use crate::embed::{CircuitSpec, EntanglerConfig};
use crate::error::{Error, Result};
use crate::noiselab::{mean_std, noise_sweep, sweep_csv, NoisePlan, SweepMode, Trial};
use crate::textdata::{load_tsv, split, tokenize, Corpus};
use crate::train::{classify, evaluate, train, write_history, Checkpoint, ParamLayout, TrainOutcome};

#[derive(Debug, Parser)]
#[command(name = "qmsan", about = "Quantum mixed-state self-attention experiments")]
pub struct Cli {
    /// Worker threads, 0 for one per core. Falls back to QMSAN_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    EvalOnly,
    Retrain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train every run and fold; write checkpoints, histories and a summary.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Accuracy of a checkpoint on a dataset, with per-sample predictions.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// TSV file; defaults to the test split saved next to the checkpoint.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Also require the checkpoint to match this config's model shape.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Test accuracy under a list of noise plans.
    Noise {
        /// Sweep one trained model; otherwise train per the config first.
        #[arg(long, conflicts_with = "config")]
        checkpoint: Option<PathBuf>,
        #[arg(long, required_unless_present = "checkpoint")]
        config: Option<PathBuf>,
        /// One plan per line, `#` starts a comment. Defaults to the config's
        /// plans.
        #[arg(long)]
        plans: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Test TSV for `--checkpoint`; defaults to the saved test split.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Training TSV for `--checkpoint --mode retrain`; defaults to the
        /// saved training split.
        #[arg(long)]
        train_data: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Entangling capability and expressivity of the entangler configurations.
    Metrics {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Normalized attention coefficients of one sentence as JSON.
    AttnExport {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        sentence: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the embedding circuit and parameter counts for a config.
    Inspect {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 2 if training diverged, 1 otherwise.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let threads = cli.threads.or_else(|| std::env::var("QMSAN_THREADS").ok().and_then(|v| v.parse().ok())).unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Diverged { .. } | Error::NonFiniteGradient(_) => 2,
        _ => 1,
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Train { config, common } => {
            let cfg = resolve(&config, &common)?;
            let summary = cmd_train(&cfg)?;
            println!("parameters: {}", summary.param_count);
            println!("train accuracy: {:.4} ± {:.4}", summary.train_acc_mean, summary.train_acc_std);
            println!("test accuracy: {:.4} ± {:.4}", summary.test_acc_mean, summary.test_acc_std);
            Ok(())
        }
        Command::Eval { checkpoint, data, config, out } => {
            let expect = config.map(RunConfig::load).transpose()?;
            let data = data.unwrap_or_else(|| sibling(&checkpoint, "test.tsv"));
            let acc = cmd_eval(&checkpoint, &data, expect.as_ref(), &out)?;
            println!("accuracy: {acc:.4}");
            Ok(())
        }
        Command::Noise { checkpoint, config, plans, mode, data, train_data, common } => {
            let plan_list = plans.as_deref().map(read_plans).transpose()?;
            let mode = mode.map(|m| match m {
                ModeArg::EvalOnly => SweepMode::EvalOnly,
                ModeArg::Retrain => SweepMode::Retrain,
            });
            let rows = match (checkpoint, config) {
                (Some(ck), _) => {
                    let test = data.unwrap_or_else(|| sibling(&ck, "test.tsv"));
                    let train_set = train_data.unwrap_or_else(|| sibling(&ck, "train.tsv"));
                    let out = common.out.unwrap_or_else(|| PathBuf::from("."));
                    cmd_noise_checkpoint(&ck, &test, &train_set, &plan_list.unwrap_or_default(), mode.unwrap_or(SweepMode::EvalOnly), &out)?
                }
                (None, Some(cfg_path)) => {
                    let mut cfg = resolve(&cfg_path, &common)?;
                    if let Some(p) = plan_list {
                        cfg.noise.plans = p;
                    }
                    if let Some(m) = mode {
                        cfg.noise.mode = m;
                    }
                    cmd_noise(&cfg)?
                }
                (None, None) => return Err(Error::Config("noise needs --checkpoint or --config".into())),
            };
            print!("{}", sweep_csv(&rows));
            Ok(())
        }
        Command::Metrics { config, common } => {
            let cfg = resolve(&config, &common)?;
            let out = cmd_metrics(&cfg)?;
            for r in &out {
                println!(
                    "{}: ent median {:.4} (IQR {:.4}–{:.4}), expr median {:.4} (IQR {:.4}–{:.4})",
                    r.config.label(),
                    r.ent.median,
                    r.ent.q1,
                    r.ent.q3,
                    r.expr.median,
                    r.expr.q1,
                    r.expr.q3
                );
            }
            Ok(())
        }
        Command::AttnExport { checkpoint, sentence, out } => {
            let path = cmd_attn_export(&checkpoint, &sentence, &out)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Inspect { config } => {
            print!("{}", cmd_inspect(&RunConfig::load(config)?)?);
            Ok(())
        }
    }
}

fn resolve(path: &Path, common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

fn write_tsv(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut out = String::new();
    for s in &corpus.samples {
        let _ = writeln!(out, "{}\t{}", s.tokens.join(" "), s.label);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parses a plans file: one plan per line, blank lines and `#` comments
/// ignored.
pub fn parse_plans(text: &str) -> Result<Vec<NoisePlan>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

fn read_plans(path: &Path) -> Result<Vec<NoisePlan>> {
    parse_plans(&std::fs::read_to_string(path)?)
}

/// One training job of an experiment.
#[derive(Debug, Clone)]
pub struct Job {
    pub run: usize,
    pub fold: usize,
    pub seed: u64,
    pub train: Corpus,
    pub test: Corpus,
}

impl Job {
    pub fn dir_name(&self) -> String {
        format!("run{}_fold{}", self.run, self.fold)
    }
}

/// Data splits for every run and fold of `cfg`, in run-then-fold order.
pub fn jobs(cfg: &RunConfig) -> Result<Vec<Job>> {
    let corpus = cfg.dataset.load()?;
    let mut out = Vec::new();
    for run in 0..cfg.runs {
        let seed = cfg.seed.wrapping_add(run as u64);
        let folds = split(&corpus, cfg.dataset.split, &mut ChaCha8Rng::seed_from_u64(seed))?;
        for (fold, f) in folds.iter().enumerate() {
            out.push(Job { run, fold, seed, train: corpus.subset(&f.train), test: corpus.subset(&f.test) });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobSummary {
    pub run: usize,
    pub fold: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub final_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub config_hash: String,
    pub dataset: String,
    pub param_count: usize,
    pub train_acc_mean: f64,
    pub train_acc_std: f64,
    pub test_acc_mean: f64,
    pub test_acc_std: f64,
    pub jobs: Vec<JobSummary>,
}

fn train_job(cfg: &RunConfig, job: &Job) -> Result<(TrainOutcome, JobSummary)> {
    let mut tc = cfg.train.clone();
    tc.seed = job.seed;
    let outcome = train(&job.train, &tc)?;
    let summary = JobSummary {
        run: job.run,
        fold: job.fold,
        seed: job.seed,
        iterations: outcome.history.len(),
        converged: outcome.converged,
        final_loss: outcome.history.last().map_or(f64::NAN, |h| h.loss),
        train_acc: evaluate(&job.train, &outcome.model)?,
        test_acc: evaluate(&job.test, &outcome.model)?,
    };
    Ok((outcome, summary))
}

/// Trains every job. Each job directory gets `checkpoint.json`,
/// `history.jsonl` and its `train.tsv` / `test.tsv` split; the output
/// directory gets `config.json` and `summary.json`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let hash = cfg.hash();
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join("config.json"), &json!({ "config_hash": hash, "config": cfg }))?;

    let mut summaries = Vec::new();
    let mut param_count = 0;
    for job in jobs(cfg)? {
        let (outcome, summary) = train_job(cfg, &job)?;
        let job_dir = dir.join(job.dir_name());
        std::fs::create_dir_all(&job_dir)?;
        Checkpoint::from_model(&outcome.model, hash.clone()).save(job_dir.join("checkpoint.json"))?;
        write_history(job_dir.join("history.jsonl"), &outcome.history)?;
        write_tsv(&job_dir.join("train.tsv"), &job.train)?;
        write_tsv(&job_dir.join("test.tsv"), &job.test)?;
        param_count = outcome.model.param_count();
        summaries.push(summary);
    }
    let (train_acc_mean, train_acc_std) = mean_std(&summaries.iter().map(|s| s.train_acc).collect::<Vec<_>>());
    let (test_acc_mean, test_acc_std) = mean_std(&summaries.iter().map(|s| s.test_acc).collect::<Vec<_>>());
    let summary = TrainSummary {
        config_hash: hash,
        dataset: cfg.dataset.load()?.name,
        param_count,
        train_acc_mean,
        train_acc_std,
        test_acc_mean,
        test_acc_std,
        jobs: summaries,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Evaluates a checkpoint on `data` and writes `predictions.csv` into `out`.
/// With `expect`, the checkpoint must have that config's parameter layout.
pub fn cmd_eval(checkpoint: &Path, data: &Path, expect: Option<&RunConfig>, out: &Path) -> Result<f64> {
    let ck = Checkpoint::load(checkpoint)?;
    if let Some(cfg) = expect {
        let t = &cfg.train;
        let per_circuit = crate::embed::embedding_param_count(t.n_qubits, t.layers, t.entangler);
        let wanted = ParamLayout::new(per_circuit, t.n_qubits, ck.vocab.len() + 1);
        if wanted != ck.layout {
            return Err(Error::Layout(format!(
                "checkpoint has {} parameters in its layout, the config expects {}",
                ck.layout.total(),
                wanted.total()
            )));
        }
    }
    let model = ck.to_model()?;
    let corpus = load_tsv(data)?;
    let preds = model.predict_all(&corpus.samples, &model.config.noise)?;
    let mut csv = String::from("index,label,y_hat,prediction\n");
    let mut correct = 0;
    for (i, (s, p)) in corpus.samples.iter().zip(&preds).enumerate() {
        let c = classify(*p);
        correct += usize::from(c == s.label);
        let _ = writeln!(csv, "{i},{},{p},{c}", s.label);
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("predictions.csv"), csv)?;
    Ok(correct as f64 / corpus.len() as f64)
}

fn write_noise(out: &Path, hash: &str, mode: SweepMode, rows: &[crate::noiselab::SweepRow]) -> Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("noise.csv"), sweep_csv(rows))?;
    write_json(&out.join("noise_summary.json"), &json!({ "config_hash": hash, "mode": mode, "rows": rows }))
}

/// Sweeps the config's plans over every run and fold, writing `noise.csv`
/// and `noise_summary.json`.
pub fn cmd_noise(cfg: &RunConfig) -> Result<Vec<crate::noiselab::SweepRow>> {
    cfg.validate()?;
    let mut trials = Vec::new();
    if !cfg.noise.plans.is_empty() {
        for job in jobs(cfg)? {
            let (outcome, _) = train_job(cfg, &job)?;
            trials.push(Trial { model: outcome.model, train: job.train, test: job.test });
        }
    }
    let rows = noise_sweep(&trials, &cfg.noise.plans, cfg.noise.mode)?;
    write_noise(&cfg.output_dir, &cfg.hash(), cfg.noise.mode, &rows)?;
    Ok(rows)
}

/// Sweeps one trained checkpoint.
pub fn cmd_noise_checkpoint(
    checkpoint: &Path,
    test: &Path,
    train_set: &Path,
    plans: &[NoisePlan],
    mode: SweepMode,
    out: &Path,
) -> Result<Vec<crate::noiselab::SweepRow>> {
    let ck = Checkpoint::load(checkpoint)?;
    let model = ck.to_model()?;
    let test = load_tsv(test)?;
    let train_set = match mode {
        SweepMode::Retrain => load_tsv(train_set)?,
        SweepMode::EvalOnly => Corpus::new("unused", Vec::new()),
    };
    let rows = noise_sweep(&[Trial { model, train: train_set, test }], plans, mode)?;
    write_noise(out, &ck.config_hash, mode, &rows)?;
    Ok(rows)
}

/// Writes `metrics.csv` and `metrics_summary.json`.
pub fn cmd_metrics(cfg: &RunConfig) -> Result<Vec<crate::circmetrics::MetricReport>> {
    cfg.metrics.validate()?;
    let out = run_metrics(&cfg.metrics)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    std::fs::write(cfg.output_dir.join("metrics.csv"), metrics_csv(&out.runs))?;
    write_json(
        &cfg.output_dir.join("metrics_summary.json"),
        &json!({ "config_hash": cfg.hash(), "settings": cfg.metrics, "reports": out.reports }),
    )?;
    Ok(out.reports)
}

/// Writes `attention.json` with the token labels and the row-normalized
/// coefficient matrix; returns its path.
pub fn cmd_attn_export(checkpoint: &Path, sentence: &str, out: &Path) -> Result<PathBuf> {
    let ck = Checkpoint::load(checkpoint)?;
    let model = ck.to_model()?;
    let tokens = tokenize(sentence)?;
    let (y_hat, art) = crate::train::forward(&tokens, &model)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("attention.json");
    write_json(
        &path,
        &json!({
            "config_hash": ck.config_hash,
            "sentence": sentence,
            "tokens": art.tokens,
            "coefficients": art.coeffs,
            "raw_alpha": art.raw_alpha,
            "y_hat": y_hat,
        }),
    )?;
    Ok(path)
}

/// Parameter counts for every entangler at the config's shape, then the
/// configured circuit as JSON.
pub fn cmd_inspect(cfg: &RunConfig) -> Result<String> {
    let t = &cfg.train;
    let mut out = String::new();
    for e in EntanglerConfig::ALL {
        let mark = if e == t.entangler { "*" } else { " " };
        let _ = writeln!(
            out,
            "{mark} {:<2} n={} L={}: {} model parameters",
            e.label(),
            t.n_qubits,
            t.layers,
            crate::embed::model_param_count(t.n_qubits, t.layers, e)
        );
    }
    out.push_str(&CircuitSpec::embedding(t.n_qubits, t.layers, t.entangler, t.positional)?.to_json()?);
    out.push('\n');
    Ok(out)
}
