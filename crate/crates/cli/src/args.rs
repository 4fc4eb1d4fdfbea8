use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Error exponents, rate regions and simulation for two-sender
/// asynchronous multiple-access channels.
#[derive(Debug, Parser)]
#[command(name = "amac", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity and capacity-achieving input of a single-user channel.
    Capacity(CapacityArgs),
    /// Pattern exponents at one rate pair.
    Exponent(ExponentArgs),
    /// Envelope exponent over a grid of rates.
    Sweep(SweepArgs),
    /// Pentagon, compound or union rate regions.
    Region(RegionArgs),
    /// Monte-Carlo simulation with exhaustive MMI decoding.
    Simulate(SimulateArgs),
    /// Exhaustive combinatorial checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SingleUserSpec {
    /// Z-channel with crossover probability 1 -> 0.
    #[arg(long, value_name = "SIGMA")]
    pub z_channel: Option<f64>,
    /// Binary symmetric channel.
    #[arg(long, value_name = "P")]
    pub bsc: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: SingleUserSpec,
    /// Width of the final capacity bracket.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Emit a JSON record instead of text.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// The two-sender channel `z = W1(x ⊕ y)` with a Z-channel `W1`, and the
/// input laws.
#[derive(Debug, Args, Clone)]
pub struct MacSpec {
    /// Crossover of the Z-channel after the XOR.
    #[arg(long, default_value_t = 0.101)]
    pub sigma: f64,
    /// `P(X = 1)` and `P(Y = 1)`; defaults to the XOR preimage of the
    /// capacity-achieving input of the Z-channel.
    #[arg(long, num_args = 2, value_names = ["PX1", "PY1"])]
    pub input: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Objective tolerance of the inner minimization.
    #[arg(long, default_value_t = 1e-11)]
    pub solver_tol: f64,
    /// Iteration cap of the inner minimization.
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub mac: MacSpec,
    /// Fractional delay `d/n`.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub r1: f64,
    #[arg(long)]
    pub r2: f64,
    /// Longest pattern in the envelope.
    #[arg(long, short = 'm', default_value_t = 40)]
    pub max_len: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub mac: MacSpec,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Blocks per decoding window, used for effective rates.
    #[arg(long = "K", short = 'k', alias = "k", default_value_t = 40)]
    pub blocks: usize,
    /// Longest pattern in the envelope; defaults to K.
    #[arg(long, short = 'm')]
    pub max_len: Option<usize>,
    #[arg(long, default_value_t = 0.002)]
    pub step: f64,
    /// Largest rate of the grid.
    #[arg(long, default_value_t = 0.4)]
    pub r_max: f64,
    /// Rate direction `(R1, R2) = (d1 R, d2 R)`.
    #[arg(long, num_args = 2, value_names = ["D1", "D2"])]
    pub ray: Option<Vec<f64>>,
    /// Add the sphere-packing exponent of the single-user channel at twice
    /// the effective rate.
    #[arg(long)]
    pub sync_bound: bool,
    /// Input grid step of the sphere-packing maximization.
    #[arg(long, default_value_t = 1e-3)]
    pub sync_grid: f64,
    /// Add one column per pattern length.
    #[arg(long)]
    pub per_pattern: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Z-channel crossover of the channel family members.
    #[arg(long = "z-channel", num_args = 1.., default_values_t = [0.101])]
    pub sigmas: Vec<f64>,
    /// `P(X = 1)` and `P(Y = 1)`; without it, the union over an input grid.
    #[arg(long, num_args = 2, value_names = ["PX1", "PY1"])]
    pub input: Option<Vec<f64>>,
    /// Input grid step for the union.
    #[arg(long, default_value_t = 0.005)]
    pub grid: f64,
    /// Boundary samples of the union.
    #[arg(long, default_value_t = 101)]
    pub boundary_points: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimChannel {
    /// `z = W1(x ⊕ y)` with a Z-channel `W1`.
    XorZ,
    /// Noiseless `z = (x, y)`.
    Pair,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "K", short = 'k', alias = "k", default_value_t = 2)]
    pub blocks: usize,
    #[arg(long, default_value_t = 0.101)]
    pub sigma: f64,
    #[arg(long, value_enum, default_value_t = SimChannel::XorZ)]
    pub channel: SimChannel,
    /// Nominal rates; `2^{nR}` is rounded down to a message count.
    #[arg(long, num_args = 2, value_names = ["R1", "R2"], default_values_t = [0.0, 0.0])]
    pub rates: Vec<f64>,
    /// Sender 1 type as symbol counts; defaults to the binary type nearest
    /// to `P(1) = 0.351746`.
    #[arg(long, value_delimiter = ',')]
    pub type_x: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub type_y: Option<Vec<u64>>,
    /// Delay `D` in symbols.
    #[arg(long, default_value_t = 0)]
    pub delay: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Seed of the codebook draw; defaults to `seed`.
    #[arg(long)]
    pub code_seed: Option<u64>,
    /// Cap on candidate message tuples.
    #[arg(long, default_value_t = 1 << 20)]
    pub cap: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check that at least half of every binary type class is balanced.
    #[arg(long)]
    pub balanced: bool,
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    /// Check the two forms of the split gap on random splits.
    #[arg(long)]
    pub splits: bool,
    /// Check the conditional type-class bound by enumeration.
    #[arg(long)]
    pub conditional: bool,
    /// Survey the packing inequality on a random tiny code.
    #[arg(long)]
    pub packing: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[command(flatten)]
    pub output: OutputArgs,
}
