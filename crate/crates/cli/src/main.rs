//! `grad-dr`: generate datasets, embed, evaluate, compare and reproduce.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Exit status classes: 2 usage, 3 data, 4 solver.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Solver(m) => m,
        }
    }
}

impl From<grad_dr::Error> for CliError {
    fn from(e: grad_dr::Error) -> Self {
        let msg = format!("{}: {e}", e.name());
        match e {
            grad_dr::Error::InvalidParameter(_) => CliError::Usage(msg),
            grad_dr::Error::Generation(_) => CliError::Data(msg),
            e if e.is_data_error() => CliError::Data(msg),
            _ => CliError::Solver(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("IoError: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "grad-dr", version, about = "Graph-adaptive dimensionality reduction")]
#[command(after_help = "Any subcommand accepts --config FILE with key=value lines; flags override it.\n\
GRAD_DR_THREADS caps the worker threads (0 or unset = all cores).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a synthetic dataset to CSV with a sidecar label file.
    Generate(GenerateArgs),
    /// Embed a CSV dataset and write the embedding plus metadata JSON.
    Embed(EmbedArgs),
    /// Score an embedding: clustering, classification or neighbor preservation.
    Eval(EvalArgs),
    /// Row-subspace distance between two embeddings.
    Compare(CompareArgs),
    /// Rerun a reference experiment end to end.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    SwissRoll,
    Trefoil,
    Plane,
    PlaneHole,
    Sphere,
    GaussianMixture,
    PlaneHoleTrefoil,
    SphereTrefoil,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub dataset: Dataset,
    /// Sample count of single-manifold datasets.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// First-manifold count of two-manifold datasets.
    #[arg(long, default_value_t = 200)]
    pub n1: usize,
    /// Trefoil count of two-manifold datasets.
    #[arg(long, default_value_t = 400)]
    pub n2: usize,
    /// Ambient dimension; omitted keeps single manifolds in 3-D.
    #[arg(long = "D")]
    #[serde(rename = "D")]
    pub dim: Option<usize>,
    /// Entrywise noise variance of the ambient embedding.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Label file; defaults to `<out>.labels`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, default_value_t = 18.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 15.0)]
    pub hole_radius: f64,
    #[arg(long, default_value_t = 3.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 7.0)]
    pub sphere_lift: f64,
    #[arg(long, default_value_t = 3.0)]
    pub trefoil_scale: f64,
    /// Number of mixture components.
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.25)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.1)]
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pca,
    DualPca,
    Kpca,
    Gkpca,
    Gmkpca,
    Multimodal,
    Semisup,
    Lle,
    Lne,
    Lneg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Collapse {
    Sum,
    L2,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct EmbedArgs {
    /// CSV with one sample per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Skip the first CSV line.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub header: bool,
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Data kernel(s), e.g. `gaussian:1` or `gaussian-dict:0.01:1:10`.
    #[arg(long, default_value = "gaussian:1")]
    pub kernel: String,
    /// Double-center kernel matrices.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub center: bool,
    /// Graph source(s): `knn:K`, `dense`, `file:PATH`, `none`.
    #[arg(long)]
    pub graph: Option<String>,
    /// Graph kernel r†(L); `identity` means the raw Laplacian as a penalty.
    #[arg(long)]
    pub graph_kernel: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma2: f64,
    /// Neighborhood size.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Polynomial order.
    #[arg(long = "P", default_value_t = 2)]
    #[serde(rename = "P")]
    pub order: usize,
    #[arg(long = "l1", default_value_t = 0.01)]
    #[serde(rename = "l1")]
    pub l1_weight: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Collapse::Sum)]
    pub collapse: Collapse,
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub renormalize: bool,
    /// Labels for the semi-supervised method.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Fraction of labels revealed to the semi-supervised method.
    #[arg(long, default_value_t = 0.2)]
    pub label_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Neighborhood size of the reported preservation score.
    #[arg(long, default_value_t = 10)]
    pub score_k: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Metadata JSON; defaults to `<out>.json`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long)]
    pub dump_plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Cluster,
    Classify,
    KnnPreserve,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct EvalArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub header: bool,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Task,
    /// Number of clusters.
    #[arg(long = "K", default_value_t = 2)]
    #[serde(rename = "K")]
    pub clusters: usize,
    /// K-means restarts per trial (best inertia kept).
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    /// Monte Carlo trials (averaged).
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Original data for neighbor preservation.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub ridge: f64,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct CompareArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub header: bool,
    /// Projector distance accepted as the same row-subspace.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Table3,
    Semisup,
    SwissRoll,
    DualTiming,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo trials; each experiment has its own default.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Neighborhood sizes for table3, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Repetitions of the dual-path timing.
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_plot_data: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GRAD_DR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("GRAD_DR_THREADS must be a count, got {v:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let args = config::expand_args(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    init_threads()?;
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Embed(a) => commands::embed(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Repro(a) => commands::repro(&a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
