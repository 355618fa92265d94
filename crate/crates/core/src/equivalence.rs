//! Numerical checks that allele-frequency dynamics and the matching PW
//! learners produce the same marginals, one step at a time and along whole
//! trajectories.

use serde::Serialize;

use crate::distribution::{JointDistribution, MarginalProfile};
use crate::dynamics::{rs_normalizer, rs_step, simulate, sr_step, DynamicsKind};
use crate::error::{Error, Result};
use crate::landscape::FitnessLandscape;
use crate::learners::{alpha_utilities, conditional_utilities, cosimulate_learners, LearnerConfig};

/// Identity checks are exact up to rounding.
pub const STEP_TOLERANCE: f64 = 1e-12;
/// Drift budget for 50-step trajectories.
pub const TRAJECTORY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Offender {
    pub t: usize,
    pub locus: usize,
    pub index: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub check: String,
    pub passed: bool,
    pub tol: f64,
    pub worst: Offender,
    /// Max absolute deviation per compared step and locus, `[t][locus]`.
    #[serde(skip)]
    pub deviations: Vec<Vec<f64>>,
}

impl EquivalenceReport {
    fn new(check: &str, tol: f64) -> Self {
        EquivalenceReport {
            check: check.to_string(),
            passed: true,
            tol,
            worst: Offender {
                t: 0,
                locus: 0,
                index: 0,
                deviation: 0.0,
            },
            deviations: Vec::new(),
        }
    }

    fn record(&mut self, t: usize, observed: &MarginalProfile, expected: &MarginalProfile) -> Result<()> {
        if observed.alleles() != expected.alleles() {
            return Err(Error::ShapeMismatch {
                expected: expected.alleles(),
                found: observed.alleles(),
            });
        }
        let mut row = Vec::with_capacity(observed.k());
        for (locus, (a, b)) in observed.vectors().iter().zip(expected.vectors()).enumerate() {
            let mut locus_max: f64 = 0.0;
            for (index, (x, y)) in a.iter().zip(b).enumerate() {
                // NaN must fail the check rather than slip past the comparisons.
                let d = match (x - y).abs() {
                    d if d.is_nan() => f64::INFINITY,
                    d => d,
                };
                if d > self.worst.deviation {
                    self.worst = Offender {
                        t,
                        locus,
                        index,
                        deviation: d,
                    };
                }
                locus_max = locus_max.max(d);
            }
            row.push(locus_max);
        }
        self.deviations.push(row);
        self.passed = self.worst.deviation <= self.tol;
        Ok(())
    }

    pub fn max_deviation(&self) -> f64 {
        self.worst.deviation
    }
}

/// Next-step marginals predicted by the learner matching `kind`:
/// `x ⊙ g̲ / w̄` for SR (and asexual), `x ⊙ g^{(r)} / w̄^R` for RS.
pub fn predicted_marginals(w: &FitnessLandscape, p: &JointDistribution, kind: DynamicsKind) -> Result<MarginalProfile> {
    let x = p.marginals();
    let (normalizer, alpha) = match kind {
        DynamicsKind::Asexual | DynamicsKind::Sr(_) => (w.average_fitness(p)?, None),
        DynamicsKind::Rs(r) => (rs_normalizer(w, p, r)?, Some(r)),
    };
    let vectors = (0..p.shape().k())
        .map(|j| {
            let g = match alpha {
                None => conditional_utilities(w, p, j)?,
                Some(r) => alpha_utilities(w, p, j, r)?,
            };
            Ok(x.locus(j).iter().zip(&g).map(|(xi, gi)| xi * gi / normalizer).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    MarginalProfile::new(vectors)
}

/// Compares claimed next-step marginals against the learner prediction.
pub fn check_marginal_claim(
    w: &FitnessLandscape,
    p: &JointDistribution,
    kind: DynamicsKind,
    claimed: &MarginalProfile,
    tol: f64,
) -> Result<EquivalenceReport> {
    let check = match kind {
        DynamicsKind::Rs(_) => "rs-marginal",
        _ => "sr-marginal",
    };
    let mut report = EquivalenceReport::new(check, tol);
    report.record(1, claimed, &predicted_marginals(w, p, kind)?)?;
    Ok(report)
}

/// One SR step's marginals against `x ⊙ g̲ / w̄`, locus by locus.
pub fn check_sr_marginal(w: &FitnessLandscape, p: &JointDistribution, r: f64, tol: f64) -> Result<EquivalenceReport> {
    let next = sr_step(w, p, r)?;
    check_marginal_claim(w, p, DynamicsKind::sr(r)?, &next.marginals(), tol)
}

/// One RS step's marginals against `x ⊙ g^{(r)} / w̄^R`.
pub fn check_rs_marginal(w: &FitnessLandscape, p: &JointDistribution, r: f64, tol: f64) -> Result<EquivalenceReport> {
    let next = rs_step(w, p, r)?;
    check_marginal_claim(w, p, DynamicsKind::rs(r)?, &next.marginals(), tol)
}

/// Learner matched to a dynamics: PW with `α = 0` for SR, `α = r` for RS.
pub fn matching_learner(kind: DynamicsKind) -> Result<LearnerConfig> {
    match kind {
        DynamicsKind::Asexual | DynamicsKind::Sr(_) => LearnerConfig::parameter_free(0.0),
        DynamicsKind::Rs(r) => LearnerConfig::parameter_free(r),
    }
}

/// Runs `steps` generations of `kind` next to the matching learners and
/// compares every player's strategy with the allele frequencies at every `t`.
pub fn check_trajectory(
    w: &FitnessLandscape,
    p0: &JointDistribution,
    kind: DynamicsKind,
    steps: usize,
    tol: f64,
) -> Result<EquivalenceReport> {
    check_trajectory_with(w, p0, kind, steps, &matching_learner(kind)?, tol)
}

/// As [`check_trajectory`] with an arbitrary learner, e.g. a deliberately
/// mismatched one as a negative control.
pub fn check_trajectory_with(
    w: &FitnessLandscape,
    p0: &JointDistribution,
    kind: DynamicsKind,
    steps: usize,
    learner: &LearnerConfig,
    tol: f64,
) -> Result<EquivalenceReport> {
    let traj = simulate(w, p0, kind, steps, 1.0)?;
    let strategies = cosimulate_learners(w, &traj.states, learner)?;
    let name = match kind {
        DynamicsKind::Rs(_) => "rs-trajectory",
        _ => "sr-trajectory",
    };
    let mut report = EquivalenceReport::new(name, tol);
    for (t, observed) in traj.marginals.iter().enumerate() {
        report.record(t, &strategies.profile_at(t), observed)?;
    }
    Ok(report)
}
