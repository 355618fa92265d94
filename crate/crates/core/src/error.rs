use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected alleles {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("invalid shape {alleles:?}: {reason}")]
    InvalidShape { alleles: Vec<usize>, reason: &'static str },

    #[error("tensor has {found} values but its shape needs {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("fitness must be strictly positive and finite, got {value} at flat index {index}")]
    NonPositiveFitness { index: usize, value: f64 },

    #[error("probability must be nonnegative and finite, got {value} at flat index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum}, too far from 1 to renormalize")]
    NotNormalized { sum: f64 },

    #[error("locus {locus} out of range for a {k}-locus tensor")]
    LocusOutOfRange { locus: usize, k: usize },

    #[error("allele {allele} out of range at locus {locus} ({count} alleles)")]
    AlleleOutOfRange { locus: usize, allele: usize, count: usize },

    #[error("allele {allele} at locus {locus} has zero marginal probability")]
    UnsupportedAllele { locus: usize, allele: usize },

    #[error("multiplicative update has nonpositive normalizer {normalizer}")]
    DegenerateUpdate { normalizer: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("s = {s} is below the selection strength {required} of the landscape")]
    SelectionStrengthTooSmall { s: f64, required: f64 },

    #[error("distribution has empty support")]
    EmptySupport,

    #[error("trajectory needs at least {needed} states, got {found}")]
    TrajectoryTooShort { needed: usize, found: usize },

    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }
}
