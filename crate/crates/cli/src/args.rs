use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "eddeg",
    version,
    about = "Euclidean distance degree certifier for matrix manifold models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the ED degree and dimension of a model.
    Degree {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// List every stationary point of the distance function, by objective.
    Enumerate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        anchor: AnchorArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the closed-form nearest point, cross-checked against the enumeration.
    Nearest {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        anchor: AnchorArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certify the count law and residual bounds over seeded trials.
    Certify {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        anchor: AnchorArgs,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Also run the multistart oracle and match its clusters.
        #[arg(long)]
        oracle: bool,
        /// Oracle starts per trial (default: 40 times the degree).
        #[arg(long)]
        starts: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Flag,
    Grassmann,
    Stiefel,
    Schubert,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Flag signature `k_1,…,k_p`.
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Flag eigenvalues `b_1,…,b_{p+1}` (default `p,…,1,0`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bs: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_val: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b_val: Option<f64>,
    /// Positive definite `B` for the Stiefel model (matrix JSON).
    #[arg(long = "B-file")]
    pub b_file: Option<PathBuf>,
    /// Draw a seeded positive definite `B` instead of `B = I`.
    #[arg(long = "B-seed", conflicts_with = "b_file")]
    pub b_seed: Option<u64>,
    /// Adapted frame `Q` for the Schubert model (matrix JSON).
    #[arg(long = "Q-file")]
    pub q_file: Option<PathBuf>,
    /// Seed of the random nesting when no frame file is given.
    #[arg(long, conflicts_with = "q_file")]
    pub frame_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct AnchorArgs {
    /// Anchor matrix JSON; disables resampling.
    #[arg(long, conflicts_with = "seed")]
    pub anchor: Option<PathBuf>,
    /// Anchor seed (overridden by `EDDEG_SEED`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    #[arg(long)]
    pub tol_mem: Option<f64>,
    #[arg(long)]
    pub tol_stat: Option<f64>,
    #[arg(long)]
    pub tol_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}
