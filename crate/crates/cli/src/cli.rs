//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "groundmetric",
    version,
    about = "Learn ground metrics as fixed points of pairwise transport distance maps"
)]
pub struct Cli {
    /// Worker threads for pairwise solves (default: GROUNDMETRIC_THREADS or
    /// all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic datasets as CSV matrices.
    Gen(GenArgs),
    /// Learn an eigenvector cost on a square dataset by power iterations.
    Eigen(EigenArgs),
    /// Learn a singular pair of costs on a rectangular data matrix.
    Singular(SingularArgs),
    /// Diagnostics: uniqueness, cone membership, principal-component
    /// eigencosts, and the large-regularization limit.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Cyclic translations of a periodic template on a 1-D grid.
    Torus1d {
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// gauss:SIGMA, bimodal:SIGMA:GAP or trimodal:SIGMA:GAP
        #[arg(long, default_value = "gauss:0.05")]
        template: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cyclic translations on a side x side periodic grid.
    Torus2d {
        #[arg(long, default_value_t = 15)]
        side: usize,
        #[arg(long, default_value = "gauss:0.1")]
        template: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Periodic bumps over a mean/scale parameter grid.
    Meanscale {
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        means: usize,
        #[arg(long, default_value_t = 5)]
        scales: usize,
        #[arg(long, default_value_t = 0.05)]
        scale_min: f64,
        #[arg(long, default_value_t = 0.25)]
        scale_max: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Block-diagonal matrix with positive blocks, e.g. --sizes 2x2,2x2
    Blocks {
        #[arg(long)]
        sizes: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Entropic,
    Mmd,
}

impl std::fmt::Display for BackendArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BackendArg::Exact => "exact",
            BackendArg::Entropic => "entropic",
            BackendArg::Mmd => "mmd",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    /// Pairwise total-variation matrix (deterministic).
    L1,
    /// Seeded random positive cost.
    Random,
}

impl std::fmt::Display for InitArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitArg::L1 => "l1",
            InitArg::Random => "random",
        })
    }
}

/// Solver and iteration knobs shared by the learning commands.
#[derive(Debug, Args, Clone)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    #[arg(long, default_value = "exact")]
    pub backend: BackendArg,
    /// Relative entropic regularization (entropic backend).
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    /// Force the scaling domain; defaults to log below eps = 0.05.
    #[arg(long)]
    pub log_domain: Option<bool>,
    #[arg(long, default_value_t = 1e-9)]
    pub marginal_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub sinkhorn_max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_hilbert: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_residual: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value = "l1")]
    pub init: InitArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record the smallest Gibbs-kernel eigenvalue per iteration
    /// (entropic backend).
    #[arg(long)]
    pub check_kernel: bool,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// First non-comment CSV line holds column names.
    #[arg(long)]
    pub header: bool,
    /// First CSV field of each row is a row name.
    #[arg(long)]
    pub row_names: bool,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    /// Square CSV matrix whose columns are the histograms.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Normalize the columns onto the simplex before solving.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Run the coupling-support uniqueness certificate on the result
    /// (exact backend only).
    #[arg(long)]
    pub certify: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    /// Independent column and row normalization.
    Canonical,
    /// Diagonal rescaling to uniform marginals first.
    Bistochastic,
}

impl std::fmt::Display for NormalizationArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormalizationArg::Canonical => "canonical",
            NormalizationArg::Bistochastic => "bistochastic",
        })
    }
}

#[derive(Debug, Args)]
pub struct SingularArgs {
    /// CSV data matrix (rows are features, columns are samples).
    #[arg(long, conflicts_with = "idx_images")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Image tensor in idx format; each image becomes one column.
    #[arg(long, requires = "idx_labels")]
    pub idx_images: Option<PathBuf>,
    #[arg(long)]
    pub idx_labels: Option<PathBuf>,
    /// Keep only images with these labels, e.g. --classes 0,1
    #[arg(long)]
    pub classes: Option<String>,
    /// Subsample this many columns (seeded).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub sample_seed: u64,
    /// Count-matrix preprocessing, e.g. --preprocess scrna:1000
    #[arg(long)]
    pub preprocess: Option<String>,
    #[arg(long, default_value = "canonical")]
    pub normalization: NormalizationArg,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Order heatmap axes by average-linkage clustering of the learned costs.
    #[arg(long)]
    pub sort_heatmaps: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(subcommand)]
    pub kind: CheckKind,
}

#[derive(Debug, Subcommand)]
pub enum CheckKind {
    /// Coupling-support uniqueness certificate for a cost on a dataset.
    Uniqueness {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        cost: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Squared-Euclidean-distance cone membership of a cost matrix.
    Cone {
        #[arg(long)]
        cost: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Principal-component eigencosts and their fixed-point residuals.
    Pca {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Gap between the entropic map at large eps and its linear limit.
    MmdLimit {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        csv: CsvArgs,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        cost: PathBuf,
        #[arg(long, default_value_t = 1000.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}
