//! Haploid k-locus population dynamics under selection and recombination,
//! the multiplicative-weights learners whose strategies track the allele
//! frequencies, and numerical checks of that correspondence.
//!
//! Genotypes are index vectors over `k >= 2` loci; both fitness landscapes
//! and population distributions are dense row-major tensors over them.

pub mod distribution;
pub mod dynamics;
pub mod equivalence;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod io;
pub mod landscape;
pub mod learners;
pub mod regret;
pub mod shape;

pub use distribution::{JointDistribution, MarginalProfile, Norm};
pub use dynamics::{DynamicsKind, Trajectory};
pub use error::{Error, Result};
pub use landscape::{average_fitness, FitnessLandscape, GameMatrix};
pub use learners::{LearnerConfig, PlayerStrategy};
pub use shape::{Genotype, LocusSet, Shape};
