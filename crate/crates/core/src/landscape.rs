use serde::{Deserialize, Serialize};

use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::shape::{Genotype, Shape};

/// Fitness `w_{i_K}` of every genotype of a k-locus haploid.
///
/// The same tensor is the common payoff of the identical-interest game in
/// which each locus is a player and its alleles are the actions; see
/// [`GameMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorJson", into = "TensorJson")]
pub struct FitnessLandscape {
    shape: Shape,
    values: Vec<f64>,
}

/// Payoff tensor of an identical-interest game.
pub type GameMatrix = FitnessLandscape;

impl FitnessLandscape {
    pub fn new(alleles: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        Self::with_shape(Shape::new(alleles)?, values)
    }

    pub fn with_shape(shape: Shape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::LengthMismatch {
                expected: shape.len(),
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NonPositiveFitness { index, value });
        }
        Ok(FitnessLandscape { shape, values })
    }

    /// 2-locus landscape from a row-per-allele-of-locus-A matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Format("ragged matrix".into()));
        }
        Self::new(vec![rows.len(), cols], rows.concat())
    }

    pub fn from_fn(shape: Shape, f: impl FnMut(usize) -> f64) -> Result<Self> {
        let values = (0..shape.len()).map(f).collect();
        Self::with_shape(shape, values)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, genotype: &Genotype) -> f64 {
        self.values[self.shape.offset(genotype.alleles())]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Genotype of the largest entry (first one on ties).
    pub fn argmax(&self) -> Genotype {
        let (flat, _) =
            self.values.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                },
            );
        self.shape.unravel(flat)
    }

    /// Smallest `s` with every entry in `[1 - s, 1 + s]`.
    pub fn selection_strength(&self) -> f64 {
        self.values.iter().map(|w| (w - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Mean fitness `Σ p w` of a population.
    pub fn average_fitness(&self, p: &JointDistribution) -> Result<f64> {
        self.shape.ensure_same(p.shape())?;
        Ok(dot(&self.values, p.probs()))
    }
}

/// Mean fitness `w̄(P) = Σ_{i_K} p_{i_K} w_{i_K}`.
pub fn average_fitness(w: &FitnessLandscape, p: &JointDistribution) -> Result<f64> {
    w.average_fitness(p)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// On-disk form shared by landscapes and distributions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorJson {
    pub alleles: Vec<usize>,
    pub values: Vec<f64>,
}

impl TryFrom<TensorJson> for FitnessLandscape {
    type Error = Error;

    fn try_from(t: TensorJson) -> Result<Self> {
        FitnessLandscape::new(t.alleles, t.values)
    }
}

impl From<FitnessLandscape> for TensorJson {
    fn from(w: FitnessLandscape) -> Self {
        TensorJson {
            alleles: w.shape.alleles().to_vec(),
            values: w.values,
        }
    }
}
