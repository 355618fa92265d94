use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use popmw::dynamics::DEFAULT_CONVERGENCE_THRESHOLD;
use popmw::experiments::InitialDistribution;
use popmw::DynamicsKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "popmw",
    version,
    about = "Haploid selection/recombination dynamics and their multiplicative-weights learners"
)]
pub struct Cli {
    /// JSON file of defaults for the subcommand's flags; flags given on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one dynamics from a landscape and an initial distribution.
    Simulate(SimulateArgs),
    /// Check that the matching learners reproduce the allele frequencies.
    Verify(VerifyArgs),
    /// Audit external regret along a trajectory.
    Regret(RegretArgs),
    /// Convergence and quality statistics over random landscapes.
    Sweep(SweepArgs),
    /// The two instances where population and learners behave differently.
    Counterexample {
        #[command(subcommand)]
        which: Counterexample,
    },
}

#[derive(Debug, Subcommand)]
pub enum Counterexample {
    /// Distance from the Wright manifold without recombination.
    Wright(WrightArgs),
    /// Different limits for uncorrelated PW and SR dynamics.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    Asexual,
    Sr,
    Rs,
}

impl Dynamics {
    pub fn with_rate(self, r: f64) -> popmw::Result<DynamicsKind> {
        match self {
            Dynamics::Asexual => Ok(DynamicsKind::Asexual),
            Dynamics::Sr => DynamicsKind::sr(r),
            Dynamics::Rs => DynamicsKind::rs(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Uniform,
    RandomProduct,
    RandomJoint,
}

impl From<Init> for InitialDistribution {
    fn from(i: Init) -> Self {
        match i {
            Init::Uniform => InitialDistribution::Uniform,
            Init::RandomProduct => InitialDistribution::RandomProduct,
            Init::RandomJoint => InitialDistribution::RandomJoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    SrMarginal,
    RsMarginal,
    SrTrajectory,
    RsTrajectory,
    All,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Fitness landscape JSON.
    #[arg(long, value_name = "FILE")]
    pub landscape: Option<PathBuf>,
    /// Initial joint distribution JSON.
    #[arg(long, value_name = "FILE")]
    pub initial: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "sr")]
    pub dynamics: Dynamics,
    /// Recombination rate.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Number of generations to run.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Stop early once the population has converged.
    #[arg(long)]
    pub stop_at_convergence: bool,
    #[arg(long, default_value_t = DEFAULT_CONVERGENCE_THRESHOLD)]
    pub threshold: f64,
    /// Trajectory CSV.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Strategy CSV of the matching learners run alongside.
    #[arg(long, value_name = "FILE")]
    pub strategies: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub check: Check,
    /// Fitness landscape JSON; without it random instances are drawn.
    #[arg(long, value_name = "FILE")]
    pub landscape: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub initial: Option<PathBuf>,
    /// Claimed next-step marginals to check instead of this tool's own step.
    #[arg(long, value_name = "FILE")]
    pub marginals: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Trajectory length for the trajectory checks.
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    /// Override the default tolerance (1e-12 per step, 1e-9 per trajectory).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random instances to check when no landscape is given.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long, value_delimiter = ',', default_value = "8,5")]
    pub alleles: Vec<usize>,
    #[arg(long, default_value_t = 0.3)]
    pub s: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON; printed to standard output when omitted.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegretArgs {
    #[arg(long, value_name = "FILE")]
    pub landscape: Option<PathBuf>,
    /// Initial distribution JSON; uniform when omitted.
    #[arg(long, value_name = "FILE")]
    pub initial: Option<PathBuf>,
    /// `sr` or `rs`.
    #[arg(long, value_enum, default_value = "sr")]
    pub dynamics: Dynamics,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Horizon T.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Selection strength in the bound; defaults to the landscape's.
    #[arg(long)]
    pub s: Option<f64>,
    /// Report JSON; printed to standard output when omitted.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// CSV of cumulative regret per round and player.
    #[arg(long, value_name = "FILE")]
    pub cumulative: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Alleles at the first locus of a two-locus landscape.
    #[arg(long, conflicts_with = "alleles")]
    pub rows: Option<usize>,
    /// Alleles at the second locus of a two-locus landscape.
    #[arg(long, conflicts_with = "alleles")]
    pub cols: Option<usize>,
    /// Allele counts for any number of loci, e.g. `4,3,3`.
    #[arg(long, value_delimiter = ',')]
    pub alleles: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.1)]
    pub s: f64,
    #[arg(long, value_enum, default_value = "sr")]
    pub dynamics: Dynamics,
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    #[arg(long, default_value_t = 100_000)]
    pub t_max: usize,
    #[arg(long, default_value_t = DEFAULT_CONVERGENCE_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub init: Init,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "POPMW_WORKERS", default_value_t = 0)]
    pub workers: usize,
    /// Per-instance records CSV.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// F(T) and F(Q) CSV.
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

impl SweepArgs {
    pub fn shape(&self) -> Vec<usize> {
        match &self.alleles {
            Some(a) => a.clone(),
            None => vec![self.rows.unwrap_or(8), self.cols.unwrap_or(5)],
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct WrightArgs {
    #[arg(long, default_value_t = 0.01)]
    pub s: f64,
    #[arg(long, default_value_t = 2000)]
    pub t_max: usize,
    /// CSV of the ℓ1 and ℓ∞ gaps per generation.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ConvergenceArgs {
    #[arg(long, default_value_t = popmw::experiments::DIVERGENT_LIMITS_T_MAX)]
    pub t_max: usize,
    /// Verdict JSON.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}
