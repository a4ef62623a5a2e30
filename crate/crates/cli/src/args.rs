use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pugm", version, about = "Profile undirected graphical models")]
pub struct Cli {
    /// Progress messages on stderr.
    #[arg(short, long, global = true, conflicts_with = "quiet")]
    pub verbose: bool,
    /// Suppress everything but errors and requested output.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and its ground truth.
    Simulate(SimulateArgs),
    /// Fit the Gaussian profile model by spike-and-slab EM.
    Fit(FitArgs),
    /// Threshold a fitted model's posterior summaries into a profile graph.
    ExtractGraph(ExtractArgs),
    /// List the independence statements a profile graph implies.
    EnumerateIndependencies(EnumerateArgs),
    /// Minimal, maximal and kind-determined compatible chain graphs.
    ChainClass(GraphIo),
    /// Check whether a chain graph is Markov-compatible with a profile graph.
    CheckCompat(CheckCompatArgs),
    /// Exhaustively check the global/connected-set equivalence on small graphs.
    VerifyThm1(VerifyArgs),
    /// Score an estimated graph against a true one.
    Evaluate(EvaluateArgs),
    /// Refit on random subsamples and compare with the full-data graph.
    Robustness(RobustnessArgs),
    /// Render a profile graph in Graphviz DOT.
    ExportDot(GraphIo),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaselineArg {
    Indexed,
    Unit,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// 1 independent, 2 two groups, 3 last level differs, 4 shared.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub scenario: u8,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub q: usize,
    /// Observations per level.
    #[arg(long)]
    pub n: usize,
    /// Probability of adding each absent baseline edge.
    #[arg(long, default_value_t = 0.01)]
    pub s: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Diagonal of the baseline precision: `indexed` (1..p) or `unit`.
    #[arg(long, value_enum, default_value = "indexed")]
    pub baseline: BaselineArg,
    /// Output directory for `level_<x>.csv`, `truth_params.json`,
    /// `truth_graph.json` and `spec.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// JSON file with all hyperparameters; individual flags override it.
    #[arg(long)]
    pub hyper: Option<PathBuf>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub p3: Option<f64>,
    #[arg(long)]
    pub p4: Option<f64>,
    #[arg(long)]
    pub nu0: Option<f64>,
    #[arg(long)]
    pub nu1: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub spectral_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EStepArg {
    /// Exact up to 22 vertices, factorized above.
    Auto,
    Exact,
    Factorized,
}

#[derive(Debug, Args)]
pub struct EmArgs {
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Relative change of the objective that counts as converged.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub estep: EStepArg,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset directory or single CSV with a `level` column.
    #[arg(long)]
    pub data: PathBuf,
    /// Model JSON (parameters, summaries, hyperparameters).
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of the per-iteration objective and parameter changes.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also record the marginal log posterior in the trace (p <= 24).
    #[arg(long)]
    pub track_posterior: bool,
    #[command(flatten)]
    pub em: EmArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct CutArgs {
    /// Pairs with r at or below this are separated at that level.
    #[arg(long, default_value_t = 0.5)]
    pub edge_cut: f64,
    /// Vertices with theta at or below this are squares.
    #[arg(long, default_value_t = 0.5)]
    pub vertex_cut: f64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cuts: CutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Property {
    /// Pairwise.
    #[value(alias = "pairwise")]
    Pmp,
    /// Local.
    #[value(alias = "local")]
    Lmp,
    /// Connected-set.
    Csmp,
    /// Global.
    #[value(alias = "global")]
    Gmp,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub property: Property,
    /// Largest number of vertices subset enumeration accepts.
    #[arg(long, default_value_t = 12)]
    pub cap: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphIo {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckCompatArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub chain: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 4)]
    pub p: usize,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("estimate_source").required(true).args(["estimate", "edges", "model"])))]
pub struct EvaluateArgs {
    /// True profile graph JSON.
    #[arg(long)]
    pub truth: PathBuf,
    /// Estimated profile graph JSON.
    #[arg(long)]
    pub estimate: Option<PathBuf>,
    /// Edge list CSV (`level,a,b[,score]`) from another method.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Fitted model JSON; its summaries give both the graph and the scores.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub cuts: CutArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RobustnessArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Share of each level's rows dropped per repetition.
    #[arg(long)]
    pub fraction: f64,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON; the table goes to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cuts: CutArgs,
    #[command(flatten)]
    pub em: EmArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
}
