//! Randomized convergence sweeps, pure-Nash classification of their limits,
//! and two small instances on which the learners and the population part ways.

mod counterexamples;
mod nash;
mod sweep;

pub use counterexamples::{
    counterexample_convergence, counterexample_wright, ConvergenceVerdict, LimitOutcome, WrightDivergence,
    DIVERGENT_LIMITS_START, DIVERGENT_LIMITS_T_MAX,
};
pub use nash::{is_pure_nash, subgame_restrict, Subgame};
pub use sweep::{
    instance_seed, kolmogorov_distance, random_landscape, run_sweep, InitialDistribution, SweepConfig, SweepRecord,
    SweepSummary,
};
