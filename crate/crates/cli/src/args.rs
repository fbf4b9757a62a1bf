use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ufg", version, about = "Undecimated graph framelet transforms and experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a graph signal into a coefficient file.
    Transform(TransformArgs),
    /// Rebuild a signal from a coefficient file.
    Reconstruct(ReconstructArgs),
    /// Shrink high-pass coefficients of a noisy signal.
    Denoise(DenoiseArgs),
    /// Framelet pooling of a graph signal into one feature vector.
    Pool(PoolArgs),
    /// Train framelet convolution networks for node classification.
    TrainNode(TrainNodeArgs),
    /// Train GCN + pooling networks for graph classification.
    TrainGraph(TrainGraphArgs),
    /// Apply feature or edge noise to a dataset.
    Perturb(PerturbArgs),
    /// Dilation and scale-level sensitivity sweep.
    Sweep(SweepArgs),
    /// Time the Chebyshev transform on random graphs.
    Bench(BenchArgs),
    /// Run the invariant suite on a random graph.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Chebyshev,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Dilation factor (> 1).
    #[arg(long, default_value_t = 2.0)]
    pub dilation: f64,
    /// Scale level J (≥ 1).
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Chebyshev degree t.
    #[arg(long, default_value_t = 16)]
    pub degree: usize,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Edge list (`N M` header, then `u v [w]` lines).
    #[arg(long)]
    pub graph: PathBuf,
    /// Signal CSV, one row per node.
    #[arg(long)]
    pub signal: PathBuf,
    #[command(flatten)]
    pub system: SystemArgs,
    /// Binary coefficient file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write coefficients as long-form CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub coefficients: PathBuf,
    /// Transform settings; read from the coefficient sidecar when omitted.
    #[arg(long)]
    pub dilation: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Compare against this signal and fail if the relative error exceeds the tolerance.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    #[command(flatten)]
    pub system: SystemArgs,
    /// Clean signal, for MSE reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PoolArg {
    Sum,
    Spectrum,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long = "pool", value_enum, default_value_t = PoolArg::Sum)]
    pub pool: PoolArg,
    #[command(flatten)]
    pub system: SystemArgs,
    /// One-row CSV, blocks in operator order, features within each block.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Relu,
    Shrinkage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Bernoulli,
    Gaussian,
    EdgeRatio,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for data generation and the first training run.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of training seeds, starting at `--seed`.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Output directory for the resolved config, metrics and plot data.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainNodeArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Citation dataset directory instead of the synthetic block model.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Shrinkage levels for a compression/accuracy trade-off curve.
    #[arg(long, value_delimiter = ',')]
    pub sigma_grid: Vec<f64>,
    /// Noise levels for a robustness curve comparing both variants.
    #[arg(long, value_delimiter = ',')]
    pub noise_grid: Vec<f64>,
    #[arg(long, value_enum, default_value_t = NoiseArg::Bernoulli)]
    pub noise_model: NoiseArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphTaskArg {
    CyclesVsStars,
    SbmFamily,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReadoutArg {
    Sum,
    Spectrum,
    Mean,
}

#[derive(Debug, Args)]
pub struct TrainGraphArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    #[arg(long, value_enum)]
    pub task: Option<GraphTaskArg>,
    #[arg(long, value_enum)]
    pub readout: Option<ReadoutArg>,
    /// Graphs per class.
    #[arg(long)]
    pub per_class: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_enum)]
    pub model: NoiseArg,
    /// Flip ratio, noise standard deviation, or target edge ratio.
    #[arg(long)]
    pub amount: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_graph: PathBuf,
    #[arg(long)]
    pub out_features: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    #[arg(long, value_delimiter = ',')]
    pub dilations: Option<Vec<f64>>,
    #[arg(long = "scale-levels", value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long = "scale-levels", value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Nodes in the random test graph.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub dilation: f64,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[arg(long, default_value_t = 16)]
    pub degree: usize,
}
