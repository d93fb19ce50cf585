use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "gbp-spectra", version, about = "Spectral analysis of random self-similar Cantor strings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Require an explicit --seed for randomized commands. On by default
    /// when the CI environment variable is set.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Roots of psi = 1 and the regime for given weights.
    Roots(RootsArgs),
    /// eta and regime over symmetric weights alpha = 1..a_max.
    Sweep(SweepArgs),
    /// Phase portrait of 1 - psi(1 - w) on a grid.
    PhaseGrid(PhaseGridArgs),
    /// Per-replicate eigenvalue counts of sampled strings.
    StringSim(StringSimArgs),
    /// Two-stage spectral CLT experiment with normality diagnostics.
    CltTest(CltArgs),
    /// Certified oscillation amplitude R.
    RConstant(RConstArgs),
    /// Box-counting dimension from covering counts.
    Boxdim(BoxdimArgs),
    /// Closed-form and Monte Carlo checks of the CRT skeleton.
    CrtCheck(CrtArgs),
    /// Re-run a manifest and compare outputs byte for byte.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Roots(_) => "roots",
            Command::Sweep(_) => "sweep",
            Command::PhaseGrid(_) => "phase-grid",
            Command::StringSim(_) => "string-sim",
            Command::CltTest(_) => "clt-test",
            Command::RConstant(_) => "r-constant",
            Command::Boxdim(_) => "boxdim",
            Command::CrtCheck(_) => "crt-check",
            Command::Replay(_) => "replay",
        }
    }

    pub fn seed_mut(&mut self) -> Option<&mut Option<u64>> {
        match self {
            Command::StringSim(a) => Some(&mut a.seed),
            Command::CltTest(a) => Some(&mut a.seed),
            Command::Boxdim(a) => Some(&mut a.seed),
            Command::CrtCheck(a) => Some(&mut a.seed),
            _ => None,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WeightArgs {
    /// Dirichlet parameters, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "sym_alpha")]
    pub alpha: Option<Vec<f64>>,
    /// Common parameter of symmetric weights.
    #[arg(long)]
    pub sym_alpha: Option<f64>,
    /// Number of symmetric weights.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RootsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,
    /// Force the argument-principle search instead of the polynomial.
    #[arg(long)]
    pub direct: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 80)]
    pub a_max: u32,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PhaseGridArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub re_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub re_max: f64,
    #[arg(long, default_value_t = -12.0, allow_negative_numbers = true)]
    pub im_min: f64,
    #[arg(long, default_value_t = 12.0, allow_negative_numbers = true)]
    pub im_max: f64,
    #[arg(long, default_value_t = 201)]
    pub resolution: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct StringSimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 1e6)]
    pub lambda: f64,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    /// Centring constant subtracted before rescaling.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub center: f64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CltArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,
    #[arg(long, default_value_t = 1e8)]
    pub lambda: f64,
    #[arg(long, default_value_t = 2000)]
    pub replicates: usize,
    /// Level of the pilot run (default: --lambda).
    #[arg(long)]
    pub pilot_lambda: Option<f64>,
    /// Size of the pilot run (default: --replicates).
    #[arg(long)]
    pub pilot_replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RConstArgs {
    /// Common parameter of the two weights.
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Target truncation bound.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Root to use (default: the leading root with positive imaginary part).
    #[arg(long, requires = "rho_im", allow_negative_numbers = true)]
    pub rho_re: Option<f64>,
    #[arg(long, requires = "rho_re", allow_negative_numbers = true)]
    pub rho_im: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BoxdimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weights: WeightArgs,
    /// Decreasing scales, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,3e-3,1e-3,3e-4,1e-4")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CrtArgs {
    /// Replicates for the entropy moment.
    #[arg(long, default_value_t = 100_000)]
    pub replicates: usize,
    /// Horizon of the martingale check.
    #[arg(long, default_value_t = 6.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1000)]
    pub martingale_replicates: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
}
