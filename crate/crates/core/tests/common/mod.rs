#![allow(dead_code)]

use popmw::{FitnessLandscape, JointDistribution, Shape};
use rand::Rng;

/// Entries uniform on `[1 − s, 1 + s]`.
pub fn landscape(rng: &mut impl Rng, alleles: &[usize], s: f64) -> FitnessLandscape {
    let shape = Shape::new(alleles.to_vec()).unwrap();
    FitnessLandscape::from_fn(shape, |_| rng.random_range(1.0 - s..=1.0 + s)).unwrap()
}

/// A generally correlated joint distribution with full support.
pub fn joint(rng: &mut impl Rng, alleles: &[usize]) -> JointDistribution {
    let shape = Shape::new(alleles.to_vec()).unwrap();
    let weights = (0..shape.len()).map(|_| rng.random_range(0.01..1.0)).collect();
    JointDistribution::from_weights(shape, weights).unwrap()
}

/// Random allele counts with locus `j` capped at `caps[j]`.
pub fn alleles(rng: &mut impl Rng, caps: &[usize]) -> Vec<usize> {
    caps.iter().map(|&c| rng.random_range(2..=c)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
