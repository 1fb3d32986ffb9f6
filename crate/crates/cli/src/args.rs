use std::path::PathBuf;

use cavity_core::Problem;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cavity", version, about = "Cavity fixed points, limit constants and finite-game checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,

    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file. Without it the report goes to `$CAVITY_OUTPUT_DIR/<name>`
    /// when that variable is set, and to stdout otherwise.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, env = "CAVITY_OUTPUT_DIR", hide_env_values = true)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limit constant of a problem in pseudo-dimension d.
    Beta(BetaArgs),
    /// Run an invariant suite; exits 2 if any check fails.
    Verify(VerifyArgs),
    /// Monte Carlo tables.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    #[arg(long, value_parser = parse_problem)]
    pub problem: Problem,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    /// A single dilution; conflicts with --theta-schedule.
    #[arg(long, conflicts_with = "theta_schedule")]
    pub theta: Option<f64>,
    /// Comma-separated increasing dilutions.
    #[arg(long, value_delimiter = ',')]
    pub theta_schedule: Option<Vec<f64>>,
    /// Grid step; overrides --cells.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    pub cells: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Report the fine-grid value instead of the Richardson combination.
    #[arg(long)]
    pub no_richardson: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    PayoffIdentity,
    OperatorProperties,
    SimulatorConsistency,
    BoundsSandwich,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::PayoffIdentity => "payoff-identity",
            Suite::OperatorProperties => "operator-properties",
            Suite::SimulatorConsistency => "simulator-consistency",
            Suite::BoundsSandwich => "bounds-sandwich",
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// payoff-identity: random unit-capacity graphs.
    #[arg(long, default_value_t = 1000)]
    pub graphs: usize,
    /// payoff-identity: random trees per tree identity.
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    /// payoff-identity: re-check one serialized instance instead.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 2.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, value_delimiter = ',', default_value = "matching", value_parser = parse_problem)]
    pub games: Vec<Problem>,
    #[arg(long, default_value_t = 4096)]
    pub cells: usize,
    /// bounds-sandwich: pseudo-dimensions.
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3")]
    pub ds: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Mean of f_B^k - f_A^k at the root for a range of depths.
    ReplicaGap(GapArgs),
    /// Exact diluted and perfect matchings of sampled mean-field graphs.
    FiniteN(FiniteArgs),
    /// Neighbourhood sizes in K_n against PWIT cluster sizes.
    Coupling(CouplingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Population,
    Auto,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 4.0)]
    pub theta: f64,
    #[arg(long, default_value = "matching", value_parser = parse_problem)]
    pub game: Problem,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long, default_value_t = 20)]
    pub k_max: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
}

#[derive(Debug, Args)]
pub struct FiniteArgs {
    #[arg(long, value_delimiter = ',', default_value = "8,12,16")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 8.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CouplingArgs {
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 1.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_problem(s: &str) -> Result<Problem, String> {
    s.parse().map_err(|e: cavity_core::Error| e.to_string())
}
