//! The `relgraph` command line.
//!
//! Exit codes: 0 success, 2 invalid input or usage, 3 I/O failure, 4 an
//! internal guard refused the job (for example the dense single-node limit).

mod commands;
mod io;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use io::{fnv1a_hex, parse_checkpoint_manifest, parse_scores, CheckpointEntry, RunManifest};

use crate::kernel::{KernelConfig, KernelKind, DEFAULT_CLAMP};
use crate::relmap::ScatterFormat;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Guard(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub(crate) fn invalid(err: impl std::fmt::Display) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) | CliError::Guard(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "relgraph", version, about = "Label-error and outlier detection over relation graphs")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "RELGRAPH_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score samples for label errors.
    DetectLabels(DetectLabelsArgs),
    /// Score query samples as outliers against a reference set.
    DetectOutliers(DetectOutliersArgs),
    /// Run a reference scorer.
    Baseline(BaselineArgs),
    /// AP, AUROC and TNR95 of a score file against binary truth.
    Eval(EvalArgs),
    /// Inject synthetic top-2 label noise.
    GenNoise(GenNoiseArgs),
    /// Relation statistics of one anchor sample across checkpoints.
    Relmap(RelmapArgs),
    /// Average max-abs-normalized score files.
    Ensemble(EnsembleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelChoice {
    Cos,
    Rbf,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Kernel temperature [default: 4 for labels, 1 otherwise]
    #[arg(long = "t")]
    pub temperature: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CLAMP)]
    pub clamp: f64,
    #[arg(long, value_enum, default_value_t = KernelChoice::Cos)]
    pub kernel: KernelChoice,
    #[arg(long, default_value_t = 1.0)]
    pub rbf_gamma: f64,
    /// Drop the prediction-compatibility factor.
    #[arg(long)]
    pub no_compat: bool,
}

impl KernelArgs {
    pub fn resolve(&self, default_temperature: f64) -> KernelConfig {
        KernelConfig {
            kind: match self.kernel {
                KernelChoice::Cos => KernelKind::TruncatedCosine,
                KernelChoice::Rbf => KernelKind::Rbf,
            },
            temperature: self.temperature.unwrap_or(default_temperature),
            clamp: self.clamp,
            use_compatibility: !self.no_compat,
            rbf_gamma: self.rbf_gamma,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectLabelsArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub probs: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    /// 0 runs on the full graph.
    #[arg(long, default_value_t = 0)]
    pub partition_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Kernighan-Lin single-node moves instead of set-level updates.
    #[arg(long)]
    pub single_node: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DetectOutliersArgs {
    #[arg(long)]
    pub query_features: PathBuf,
    #[arg(long)]
    pub query_probs: PathBuf,
    #[arg(long)]
    pub ref_features: PathBuf,
    #[arg(long)]
    pub ref_probs: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Reference rows to sample; 0 uses all of them.
    #[arg(long, default_value_t = 0)]
    pub subset_size: usize,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    /// entropy, least-confidence, margin, loss, msp, max-logit, energy or knn
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub probs: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub logits: Option<PathBuf>,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub ref_features: Option<PathBuf>,
    /// KNN reference rows to sample; 0 uses all of them.
    #[arg(long, default_value_t = 0)]
    pub ref_subset_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scores: PathBuf,
    /// int64 vector of 0/1.
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenNoiseArgs {
    #[arg(long)]
    pub probs: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_labels: PathBuf,
    /// int64 vector, 1 where the label was flipped.
    #[arg(long)]
    pub out_mask: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatChoice {
    Csv,
    Svg,
}

impl From<FormatChoice> for ScatterFormat {
    fn from(f: FormatChoice) -> Self {
        match f {
            FormatChoice::Csv => ScatterFormat::Csv,
            FormatChoice::Svg => ScatterFormat::Svg,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RelmapArgs {
    /// JSON list of {"features": path, "probs": path}, oldest first.
    #[arg(long)]
    pub checkpoints: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub anchor: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatChoice::Csv)]
    pub format: FormatChoice,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub scores: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    // buffered so the closure stays Send; written once the job succeeds
    let printed = pool.install(|| {
        let mut buf: Vec<u8> = Vec::new();
        match &cli.command {
            Command::DetectLabels(a) => commands::detect_labels(a),
            Command::DetectOutliers(a) => commands::detect_outliers(a),
            Command::Baseline(a) => commands::baseline(a),
            Command::Eval(a) => commands::eval(a, &mut buf),
            Command::GenNoise(a) => commands::gen_noise(a, &mut buf),
            Command::Relmap(a) => commands::relmap(a, &mut buf),
            Command::Ensemble(a) => commands::ensemble(a),
        }
        .map(|()| buf)
    })?;
    out.write_all(&printed).map_err(|e| CliError::Io(format!("stdout: {e}")))
}
