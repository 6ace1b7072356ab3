use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qcomp", version, about = "One-shot quantum compression experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand. Unset numeric flags take the
/// subcommand's default, which is echoed in the report.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Dimension of the random instance (ignored with --fixture).
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Discretization: slots per eigenvector.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Input fixture (JSON). Bare names are also looked up in the bundled fixtures/.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Include output states in the per-trial transcript and reports.
    #[arg(long)]
    pub dump_states: bool,
    /// Per-trial JSONL transcript path (protocol runs only).
    #[arg(long)]
    #[serde(skip)]
    pub transcript: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fidelity, trace distance, entropies and divergences of a state pair.
    Quantities(Common),
    /// Smoothed state ρ′ with its max-divergence certificate.
    Substate(Common),
    /// Monte Carlo run of the compression protocol (CSV per trial by default).
    Compress(CompressArgs),
    /// Compression when Bob already holds ρ_A.
    Sideinfo(Common),
    /// Exact and sampled agreement of correlated sampling.
    Corrsample(CorrsampleArgs),
    /// Single-coordinate compression of a one-way protocol.
    Oneway(OnewayArgs),
    /// Protocol statistics over a grid of K or ε (CSV by default).
    Sweep(SweepArgs),
    /// Runs the full property suite; exits 1 on a violation.
    Selfcheck(SelfcheckArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CompressArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Upper bound on D(ρ‖σ) in bits; computed when absent.
    #[arg(long)]
    pub c: Option<f64>,
    /// Compress through a channel: identity, depolarizing:<p> or random:<kraus rank>.
    #[arg(long)]
    pub channel: Option<String>,
    /// Run on ρ itself instead of the smoothed ρ′.
    #[arg(long)]
    pub no_smooth: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CorrsampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Outcomes of the random projective measurement.
    #[arg(long, default_value_t = 2)]
    pub outcomes: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OnewayArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Built-in protocol used when no fixture is given: equality, index or superdense.
    #[arg(long, default_value = "equality")]
    pub builtin: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    K,
    Eps,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "k")]
    pub over: Axis,
    /// Comma-separated grid; defaults to 8,16,32,64 for K and 0.3,0.45,0.6 for ε.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SelfcheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Treat any case with slack below this value as a violation.
    #[arg(long, allow_hyphen_values = true)]
    pub margin: Option<f64>,
}
