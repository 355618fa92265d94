//! The worked 3×2 example used throughout the documentation and tests.

use crate::distribution::JointDistribution;
use crate::landscape::FitnessLandscape;

/// Fitness of genotypes `(a_i, b_j)`, alleles `a_1..a_3` by `b_1, b_2`.
pub fn reference_landscape() -> FitnessLandscape {
    FitnessLandscape::from_rows(&[vec![1.0, 0.5], vec![1.5, 1.2], vec![1.3, 0.8]]).expect("valid landscape")
}

/// Product distribution with marginals `(0.25, 0.25, 0.5)` and `(0.4, 0.6)`.
pub fn reference_initial() -> JointDistribution {
    JointDistribution::from_rows(&[vec![0.1, 0.15], vec![0.1, 0.15], vec![0.2, 0.3]]).expect("valid distribution")
}
