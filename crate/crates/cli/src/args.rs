use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "portionforge",
    version,
    about = "Budget aggregation: mechanisms, axiom audits, impossibility certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a mechanism on a profile file.
    Aggregate(AggregateArgs),
    /// Audit a mechanism against an axiom on a profile file or random profiles.
    Audit(AuditArgs),
    /// Certify the efficiency/strategyproofness/proportionality impossibility.
    VerifyImpossibility(VerifyArgs),
    /// Brute-force maximization on the simplex lattice.
    Oracle(OracleArgs),
    /// Solve the Nash rule and print its decomposition certificate.
    CertifyNash(CertifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// Floats only, one value per line.
    Csv,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub mechanism: String,
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Cap for `capped-nearest`.
    #[arg(long, default_value_t = 0.9)]
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axiom {
    Strategyproofness,
    GroupStrategyproofness,
    Efficiency,
    RangeRespect,
    Proportionality,
    Cfs,
    Anonymity,
    Neutrality,
    Participation,
    Continuity,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, value_enum)]
    pub axiom: Axiom,
    #[arg(long)]
    pub mechanism: String,
    /// Utility model; defaults to the profile file's model, or leontief
    /// for random profiles.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub profile: Option<PathBuf>,
    /// Random profiles: agents, alternatives, trials.
    #[arg(long, num_args = 3, value_names = ["N", "M", "TRIALS"])]
    pub random: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampled profiles or permutations where the axiom samples.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.9)]
    pub cap: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings (the report is then no longer reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `l1` or `linf`.
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub agents: usize,
    #[arg(long, default_value_t = 3)]
    pub alternatives: usize,
    /// Also run this mechanism through the profiles of the argument.
    #[arg(long)]
    pub mechanism: Option<String>,
    #[arg(long, default_value_t = 0.9)]
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Nash,
    /// Negative total ℓ1 distance to the peaks.
    Utilitarian,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub objective: Objective,
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long)]
    pub resolution: usize,
    /// Largest number of lattice points to enumerate.
    #[arg(long)]
    pub budget: Option<u128>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = portionforge_core::welfare::DEFAULT_TOL)]
    pub tol: f64,
}
