mod commands;
mod manifest;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Failure of one command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, e: io::Error) -> Self {
        CliError::Data(format!("cannot access {}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<driftlab::Error> for CliError {
    fn from(e: driftlab::Error) -> Self {
        match e {
            driftlab::Error::Diverged { .. } => CliError::Numerical(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "driftlab", version, about = "Diachronic word embeddings and semantic drift analysis")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic corpus with planted drift.
    Synth(SynthArgs),
    /// Build the vocabulary and the time-sliced corpus cache.
    Slice(SliceArgs),
    /// Train a static or dynamic embedding model.
    Train(TrainArgs),
    /// Scaled held-out log-likelihood per slice.
    Eval(EvalArgs),
    /// Rank evaluation curves of several models.
    Compare(CompareArgs),
    /// Per-word drift report, top drifting words and histograms.
    Drift(DriftArgs),
    /// Nearest neighbors of a word at one slice.
    Neighbors(NeighborsArgs),
    /// Fit an orthogonal map between two static models.
    Align(AlignArgs),
    /// Drift and similarity records for translation pairs.
    Xdrift(XdriftArgs),
    /// Classify cross-lingual drift records.
    Classify(ClassifyArgs),
    /// 2-D projection of word trajectories and their neighbors.
    Project(ProjectArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Spec file of `key = value` lines.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SliceArgs {
    /// Line-delimited `date<TAB>text` input.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub vocab_size: usize,
    /// annual, monthly or days:N.
    #[arg(long, default_value = "annual")]
    pub granularity: String,
    /// Shipped list (en, fr), a file path, or none.
    #[arg(long, default_value = "none")]
    pub stoplist: String,
    /// Subsampling threshold, or none.
    #[arg(long, default_value = "1e-5")]
    pub subsample: String,
    #[arg(long, default_value_t = 0.1)]
    pub valid: f64,
    #[arg(long, default_value_t = 0.1)]
    pub test: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = driftlab::corpus::DEFAULT_DATE_FORMAT)]
    pub date_format: String,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Corpus cache written by `slice`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Vocabulary file (default: vocab.tsv beside the cache).
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// dbe, dbe-i, dbe-nc or dbe-sc.
    #[arg(long)]
    pub variant: Option<String>,
    /// Chooses the default minibatch count: annual, monthly or days:N.
    #[arg(long)]
    pub granularity: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Defaults to lambda / 1000.
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// static, random, or an embedding directory.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub static_epochs: Option<usize>,
    #[arg(long)]
    pub minibatches: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Stop after static training and write the static model.
    #[arg(long)]
    pub static_only: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Words per minibatch in the scale factor (default: the model's).
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// `name=curve.tsv`, repeated.
    #[arg(long = "curve", required = true)]
    pub curves: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DriftArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub t0: usize,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// euclidean or cosine.
    #[arg(long, default_value = "euclidean")]
    pub metric: String,
    #[arg(long, default_value_t = driftlab::drift::DEFAULT_BINS)]
    pub bins: usize,
    /// linear or log bin edges.
    #[arg(long, default_value = "linear")]
    pub bin_scale: String,
    /// Per-word report; top-k, summary and histogram tables go beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct NeighborsArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub word: String,
    /// Slice (default: every slice).
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the mapped source embeddings here, for `train --init`.
    #[arg(long)]
    pub aligned: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct XdriftArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub t0: usize,
    /// Default: last slice.
    #[arg(long)]
    pub t_last: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub records: PathBuf,
    /// mean, percentile:P or fixed:SRC,TGT,SIM.
    #[arg(long, default_value = "mean")]
    pub cuts: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    /// `name=model_dir` or a bare model directory, repeated.
    #[arg(long = "model", required = true)]
    pub models: Vec<String>,
    /// Comma-separated focus words.
    #[arg(long)]
    pub words: String,
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn init_logging() {
    let level = std::env::var("DRIFTLAB_LOG").unwrap_or_else(|_| "warn".into());
    let level = match level.as_str() {
        "error" | "warn" | "info" | "debug" => level,
        other => {
            eprintln!("driftlab: ignoring DRIFTLAB_LOG={other}; expected error, warn, info or debug");
            "warn".into()
        }
    };
    env_logger::Builder::new().parse_filters(&level).format_timestamp(None).init();
}

fn run(argv: &[String]) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(CliError::Usage(e.render().to_string()));
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }
    commands::dispatch(cli.command, argv)
}

fn main() -> ExitCode {
    init_logging();
    let argv: Vec<String> = std::env::args().collect();
    match run(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("{}", m.trim_end()),
                e => eprintln!("driftlab: {e}"),
            }
            ExitCode::from(e.code())
        }
    }
}
