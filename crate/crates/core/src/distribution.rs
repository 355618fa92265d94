//! Joint genotype distributions and the quantities derived from them:
//! marginals, conditionals, linkage disequilibrium and the Wright manifold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::TensorJson;
use crate::shape::{Genotype, Shape};

/// Largest deviation of a total from 1 that construction silently absorbs.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;

/// Population frequencies `P` over genotypes; equivalently, a correlated
/// strategy profile of the locus game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorJson", into = "TensorJson")]
pub struct JointDistribution {
    shape: Shape,
    probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    Linf,
}

impl JointDistribution {
    pub fn new(alleles: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        Self::with_shape(Shape::new(alleles)?, probs)
    }

    /// Validates entries and renormalizes when the total is within
    /// [`RENORMALIZE_TOLERANCE`] of 1.
    pub fn with_shape(shape: Shape, probs: Vec<f64>) -> Result<Self> {
        check_len(&shape, probs.len())?;
        check_nonnegative(&probs)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self::scaled(shape, probs, sum))
    }

    /// Normalizes arbitrary nonnegative weights with a positive total.
    pub fn from_weights(shape: Shape, weights: Vec<f64>) -> Result<Self> {
        check_len(&shape, weights.len())?;
        check_nonnegative(&weights)?;
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::DegenerateUpdate { normalizer: sum });
        }
        Ok(Self::scaled(shape, weights, sum))
    }

    /// 2-locus distribution from a row-per-allele-of-locus-A matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Format("ragged matrix".into()));
        }
        Self::new(vec![rows.len(), cols], rows.concat())
    }

    fn scaled(shape: Shape, mut probs: Vec<f64>, sum: f64) -> Self {
        if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        JointDistribution { shape, probs }
    }

    pub fn uniform(shape: Shape) -> Self {
        let n = shape.len();
        JointDistribution {
            shape,
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// All mass on one genotype.
    pub fn point(shape: Shape, genotype: &Genotype) -> Result<Self> {
        let g = Genotype::new(&shape, genotype.0.clone())?;
        let mut probs = vec![0.0; shape.len()];
        probs[shape.offset(g.alleles())] = 1.0;
        Ok(JointDistribution { shape, probs })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, genotype: &Genotype) -> f64 {
        self.probs[self.shape.offset(genotype.alleles())]
    }

    /// Allele frequencies `x_{i_j} = Σ_{I(-j)} p_{i_j, i_{-j}}` at one locus.
    pub fn marginal(&self, locus: usize) -> Result<Vec<f64>> {
        self.shape.check_locus(locus)?;
        let mut x = vec![0.0; self.shape.n(locus)];
        for (flat, &p) in self.probs.iter().enumerate() {
            x[self.shape.allele_at(flat, locus)] += p;
        }
        Ok(x)
    }

    pub fn marginals(&self) -> MarginalProfile {
        let vectors = (0..self.shape.k())
            .map(|j| self.marginal(j).expect("locus in range"))
            .collect();
        MarginalProfile { vectors }
    }

    /// `P(i_{-j} | i_j)` over the other loci, row-major with locus `j` removed.
    pub fn conditional_marginal(&self, locus: usize, allele: usize) -> Result<Vec<f64>> {
        self.shape.check_allele(locus, allele)?;
        let x = self.marginal(locus)?[allele];
        if x <= 0.0 {
            return Err(Error::UnsupportedAllele { locus, allele });
        }
        Ok(self
            .probs
            .iter()
            .enumerate()
            .filter(|(flat, _)| self.shape.allele_at(*flat, locus) == allele)
            .map(|(_, &p)| p / x)
            .collect())
    }

    /// `D_{i_K} = p_{i_K} - Π_j x_{i_j}`, the deviation from the product of
    /// all k marginals.
    pub fn linkage_disequilibrium(&self) -> Vec<f64> {
        let product = self.marginals().product_weights(&self.shape);
        self.probs.iter().zip(product).map(|(p, q)| p - q).collect()
    }

    /// Product of this distribution's marginals: its image on the Wright
    /// manifold.
    pub fn wright_projection(&self) -> JointDistribution {
        let probs = self.marginals().product_weights(&self.shape);
        JointDistribution {
            shape: self.shape.clone(),
            probs,
        }
    }

    pub fn distance(&self, other: &JointDistribution, norm: Norm) -> Result<f64> {
        self.shape.ensure_same(&other.shape)?;
        Ok(distance_slices(&self.probs, &other.probs, norm))
    }

    /// Largest genotype frequency and where it sits.
    pub fn max_entry(&self) -> (Genotype, f64) {
        let (flat, p) =
            self.probs.iter().copied().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, p)| {
                    if p > best.1 {
                        (i, p)
                    } else {
                        best
                    }
                },
            );
        (self.shape.unravel(flat), p)
    }

    /// Alleles with positive marginal frequency, per locus.
    pub fn support_alleles(&self) -> Vec<Vec<usize>> {
        let mut used: Vec<Vec<bool>> = self.shape.alleles().iter().map(|&n| vec![false; n]).collect();
        for (flat, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                for (j, u) in used.iter_mut().enumerate() {
                    u[self.shape.allele_at(flat, j)] = true;
                }
            }
        }
        used.into_iter()
            .map(|u| u.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect())
            .collect()
    }
}

pub(crate) fn distance_slices(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    match norm {
        Norm::L1 => diffs.sum(),
        Norm::Linf => diffs.fold(0.0, f64::max),
    }
}

fn check_len(shape: &Shape, found: usize) -> Result<()> {
    if found == shape.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: shape.len(),
            found,
        })
    }
}

fn check_nonnegative(values: &[f64]) -> Result<()> {
    match values.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
        Some((index, &value)) => Err(Error::NegativeProbability { index, value }),
        None => Ok(()),
    }
}

impl TryFrom<TensorJson> for JointDistribution {
    type Error = Error;

    fn try_from(t: TensorJson) -> Result<Self> {
        JointDistribution::new(t.alleles, t.values)
    }
}

impl From<JointDistribution> for TensorJson {
    fn from(p: JointDistribution) -> Self {
        TensorJson {
            alleles: p.shape.alleles().to_vec(),
            values: p.probs,
        }
    }
}

/// One probability vector per locus: allele frequencies, or the mixed
/// strategy of each player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarginalsJson", into = "MarginalsJson")]
pub struct MarginalProfile {
    vectors: Vec<Vec<f64>>,
}

impl MarginalProfile {
    /// Same validation and renormalization policy as [`JointDistribution`],
    /// applied to every vector.
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::InvalidShape {
                alleles: vectors.iter().map(Vec::len).collect(),
                reason: "at least two loci are required",
            });
        }
        let vectors = vectors.into_iter().map(normalize_vector).collect::<Result<Vec<_>>>()?;
        Ok(MarginalProfile { vectors })
    }

    pub fn uniform(shape: &Shape) -> Self {
        MarginalProfile {
            vectors: shape.alleles().iter().map(|&n| vec![1.0 / n as f64; n]).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn locus(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn alleles(&self) -> Vec<usize> {
        self.vectors.iter().map(Vec::len).collect()
    }

    /// The product distribution with these marginals.
    pub fn product(&self) -> Result<JointDistribution> {
        let shape = Shape::new(self.alleles())?;
        let probs = self.product_weights(&shape);
        JointDistribution::from_weights(shape, probs)
    }

    pub(crate) fn product_weights(&self, shape: &Shape) -> Vec<f64> {
        (0..shape.len())
            .map(|flat| {
                self.vectors
                    .iter()
                    .enumerate()
                    .map(|(j, x)| x[shape.allele_at(flat, j)])
                    .product()
            })
            .collect()
    }

    /// Largest absolute entrywise difference, with its (locus, allele).
    pub fn max_abs_diff(&self, other: &MarginalProfile) -> Result<(f64, usize, usize)> {
        if self.alleles() != other.alleles() {
            return Err(Error::ShapeMismatch {
                expected: self.alleles(),
                found: other.alleles(),
            });
        }
        let mut worst = (0.0, 0, 0);
        for (j, (a, b)) in self.vectors.iter().zip(&other.vectors).enumerate() {
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                let d = (x - y).abs();
                if d > worst.0 {
                    worst = (d, j, i);
                }
            }
        }
        Ok(worst)
    }
}

fn normalize_vector(mut v: Vec<f64>) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidShape {
            alleles: vec![0],
            reason: "every locus needs at least one allele",
        });
    }
    check_nonnegative(&v)?;
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
        return Err(Error::NotNormalized { sum });
    }
    v.iter_mut().for_each(|x| *x /= sum);
    Ok(v)
}

#[derive(Serialize, Deserialize)]
struct MarginalsJson {
    marginals: Vec<Vec<f64>>,
}

impl TryFrom<MarginalsJson> for MarginalProfile {
    type Error = Error;

    fn try_from(m: MarginalsJson) -> Result<Self> {
        MarginalProfile::new(m.marginals)
    }
}

impl From<MarginalProfile> for MarginalsJson {
    fn from(m: MarginalProfile) -> Self {
        MarginalsJson { marginals: m.vectors }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::reference_initial;

    fn diag() -> JointDistribution {
        JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn reference_marginals() {
        let p = reference_initial();
        assert_close(&p.marginal(0).unwrap(), &[0.25, 0.25, 0.5], 1e-15);
        assert_close(&p.marginal(1).unwrap(), &[0.4, 0.6], 1e-15);
        assert!(matches!(p.marginal(2), Err(Error::LocusOutOfRange { .. })));
    }

    #[test]
    fn point_marginal_is_indicator() {
        let shape = Shape::new(vec![3, 2]).unwrap();
        let p = JointDistribution::point(shape, &Genotype(vec![1, 0])).unwrap();
        assert_eq!(p.marginal(0).unwrap(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn conditionals() {
        let p = reference_initial();
        for i in 0..3 {
            assert_close(&p.conditional_marginal(0, i).unwrap(), &[0.4, 0.6], 1e-15);
        }
        assert_close(&diag().conditional_marginal(0, 0).unwrap(), &[1.0, 0.0], 0.0);
        let shape = Shape::new(vec![2, 2]).unwrap();
        let point = JointDistribution::point(shape, &Genotype(vec![0, 0])).unwrap();
        assert!(matches!(
            point.conditional_marginal(0, 1),
            Err(Error::UnsupportedAllele { locus: 0, allele: 1 })
        ));
    }

    #[test]
    fn linkage_of_product_and_diagonal() {
        assert!(reference_initial()
            .linkage_disequilibrium()
            .iter()
            .all(|d| d.abs() < 1e-16));
        assert_close(&diag().linkage_disequilibrium(), &[0.25, -0.25, -0.25, 0.25], 0.0);
    }

    #[test]
    fn projection() {
        let p = reference_initial();
        assert!(p.wright_projection().distance(&p, Norm::Linf).unwrap() < 1e-16);
        assert_eq!(diag().wright_projection().probs(), &[0.25; 4]);
    }

    #[test]
    fn distance_to_projection() {
        let p = JointDistribution::from_rows(&[vec![0.625, 0.125], vec![0.125, 0.125]]).unwrap();
        let q = p.wright_projection();
        assert!((p.distance(&q, Norm::L1).unwrap() - 0.25).abs() < 1e-15);
        assert!((p.distance(&q, Norm::Linf).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(p.distance(&p, Norm::L1).unwrap(), 0.0);
        let other = JointDistribution::uniform(Shape::new(vec![2, 3]).unwrap());
        assert!(p.distance(&other, Norm::L1).is_err());
    }

    #[test]
    fn renormalization_policy() {
        let p = JointDistribution::new(vec![2, 2], vec![0.25, 0.25, 0.25, 0.25 + 5e-10]).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            JointDistribution::new(vec![2, 2], vec![0.25, 0.25, 0.25, 0.26]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            JointDistribution::new(vec![2, 2], vec![0.5, 0.5, 0.5, -0.5]),
            Err(Error::NegativeProbability { index: 3, .. })
        ));
    }

    #[test]
    fn support_alleles_skip_empty_rows() {
        let p = JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.0], vec![0.25, 0.25]]).unwrap();
        assert_eq!(p.support_alleles(), vec![vec![0, 2], vec![0, 1]]);
    }

    #[test]
    fn marginal_profile_json() {
        let m: MarginalProfile = serde_json::from_str(r#"{"marginals":[[0.5,0.5],[1.0,0.0,0.0]]}"#).unwrap();
        assert_eq!(m.alleles(), vec![2, 3]);
        assert!(serde_json::from_str::<MarginalProfile>(r#"{"marginals":[[0.5,0.6],[1.0]]}"#).is_err());
    }
}
