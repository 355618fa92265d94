//! Tensor shapes over genotype space and the index types that address them.
//!
//! A k-locus tensor is stored dense and row-major: the last locus varies
//! fastest. Locus and allele indices are 0-based everywhere in the API; only
//! the `Display` form of [`Genotype`] is 1-based.

use std::fmt;

use crate::error::{Error, Result};

/// Allele counts `n_1..n_k` together with row-major strides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    alleles: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(alleles: Vec<usize>) -> Result<Self> {
        if alleles.len() < 2 {
            return Err(Error::InvalidShape {
                alleles,
                reason: "at least two loci are required",
            });
        }
        if alleles.len() > LocusSet::MAX_LOCI {
            return Err(Error::InvalidShape {
                alleles,
                reason: "too many loci",
            });
        }
        if alleles.contains(&0) {
            return Err(Error::InvalidShape {
                alleles,
                reason: "every locus needs at least one allele",
            });
        }
        let mut strides = vec![1; alleles.len()];
        let mut len = 1usize;
        for j in (0..alleles.len()).rev() {
            strides[j] = len;
            len = len.checked_mul(alleles[j]).ok_or(Error::InvalidShape {
                alleles: alleles.clone(),
                reason: "tensor size overflows",
            })?;
        }
        Ok(Shape { alleles, strides, len })
    }

    /// Number of loci.
    pub fn k(&self) -> usize {
        self.alleles.len()
    }

    pub fn alleles(&self) -> &[usize] {
        &self.alleles
    }

    /// Allele count at one locus.
    pub fn n(&self, locus: usize) -> usize {
        self.alleles[locus]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Number of genotypes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn check_locus(&self, locus: usize) -> Result<()> {
        if locus < self.k() {
            Ok(())
        } else {
            Err(Error::LocusOutOfRange { locus, k: self.k() })
        }
    }

    pub fn check_allele(&self, locus: usize, allele: usize) -> Result<()> {
        self.check_locus(locus)?;
        if allele < self.alleles[locus] {
            Ok(())
        } else {
            Err(Error::AlleleOutOfRange {
                locus,
                allele,
                count: self.alleles[locus],
            })
        }
    }

    pub fn ensure_same(&self, other: &Shape) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.alleles.clone(),
                found: other.alleles.clone(),
            })
        }
    }

    /// Allele of `locus` in the genotype stored at `flat`.
    #[inline]
    pub fn allele_at(&self, flat: usize, locus: usize) -> usize {
        (flat / self.strides[locus]) % self.alleles[locus]
    }

    /// Flat offset of a full index vector. Indices are not range-checked.
    #[inline]
    pub fn offset(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(&i, &stride)| i * stride).sum()
    }

    pub fn unravel(&self, flat: usize) -> Genotype {
        Genotype((0..self.k()).map(|j| self.allele_at(flat, j)).collect())
    }

    /// Flat offset of the genotype taking alleles of `first` on the loci in
    /// `loci` and alleles of `second` everywhere else.
    #[inline]
    pub fn splice(&self, loci: LocusSet, first: usize, second: usize) -> usize {
        let mut out = 0;
        for j in 0..self.k() {
            let src = if loci.contains(j) { first } else { second };
            out += self.allele_at(src, j) * self.strides[j];
        }
        out
    }
}

/// A full genotype: one allele index per locus.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype(pub Vec<usize>);

impl Genotype {
    pub fn new(shape: &Shape, alleles: Vec<usize>) -> Result<Self> {
        if alleles.len() != shape.k() {
            return Err(Error::LengthMismatch {
                expected: shape.k(),
                found: alleles.len(),
            });
        }
        for (j, &a) in alleles.iter().enumerate() {
            shape.check_allele(j, a)?;
        }
        Ok(Genotype(alleles))
    }

    pub fn alleles(&self) -> &[usize] {
        &self.0
    }

    /// Same genotype with one locus switched to another allele.
    pub fn deviate(&self, locus: usize, allele: usize) -> Genotype {
        let mut g = self.0.clone();
        g[locus] = allele;
        Genotype(g)
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, a) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a + 1)?;
        }
        write!(f, ")")
    }
}

/// Serialized in its 1-based display form, e.g. `"(2,1)"`.
impl serde::Serialize for Genotype {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A subset `J` of the loci, stored as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocusSet(u64);

impl LocusSet {
    pub const MAX_LOCI: usize = 63;

    pub fn empty() -> Self {
        LocusSet(0)
    }

    pub fn full(k: usize) -> Self {
        LocusSet((1u64 << k) - 1)
    }

    pub fn from_bits(bits: u64) -> Self {
        LocusSet(bits)
    }

    pub fn single(locus: usize) -> Self {
        LocusSet(1 << locus)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, locus: usize) -> bool {
        self.0 >> locus & 1 == 1
    }

    /// `-J` relative to `k` loci.
    pub fn complement(self, k: usize) -> Self {
        LocusSet(!self.0 & Self::full(k).0)
    }

    /// All `2^k` subsets of `k` loci.
    pub fn all_subsets(k: usize) -> impl Iterator<Item = LocusSet> {
        (0..1u64 << k).map(LocusSet)
    }
}
