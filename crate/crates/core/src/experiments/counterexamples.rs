use serde::Serialize;

use super::nash::is_pure_nash;
use crate::distribution::{JointDistribution, MarginalProfile, Norm};
use crate::dynamics::{run_until_converged, simulate, DynamicsKind, Trajectory, DEFAULT_CONVERGENCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::landscape::FitnessLandscape;
use crate::learners::independent_pw_until_converged;
use crate::shape::{Genotype, Shape};

/// How far the population strays from the Wright manifold when only one
/// genotype is favoured.
#[derive(Debug, Clone, PartialEq)]
pub struct WrightDivergence {
    pub s: f64,
    pub trajectory: Trajectory,
    /// ℓ1 distance between `P^t` and the product of its marginals.
    pub l1: Vec<f64>,
    /// Same in ℓ∞.
    pub linf: Vec<f64>,
    pub max_l1: f64,
    pub argmax_t: usize,
    pub max_linf: f64,
}

/// 2×2 landscape with `w_11 = 1 + s` and all other entries 1, no
/// recombination, started from the uniform distribution.
pub fn counterexample_wright(s: f64, t_max: usize) -> Result<WrightDivergence> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param("s", s, "must lie in (0, 1)"));
    }
    let w = FitnessLandscape::from_rows(&[vec![1.0 + s, 1.0], vec![1.0, 1.0]])?;
    let p0 = JointDistribution::uniform(w.shape().clone());
    let trajectory = simulate(&w, &p0, DynamicsKind::Sr(0.0), t_max, DEFAULT_CONVERGENCE_THRESHOLD)?;
    let gap = |norm| -> Vec<f64> {
        trajectory
            .states
            .iter()
            .map(|p| p.distance(&p.wright_projection(), norm).expect("same shape"))
            .collect()
    };
    let l1 = gap(Norm::L1);
    let linf = gap(Norm::Linf);
    let (argmax_t, max_l1) = l1
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (t, d)| if d > best.1 { (t, d) } else { best });
    let max_linf = linf.iter().copied().fold(0.0, f64::max);
    Ok(WrightDivergence {
        s,
        trajectory,
        l1,
        linf,
        max_l1,
        argmax_t,
        max_linf,
    })
}

/// Step cap for [`counterexample_convergence`].
pub const DIVERGENT_LIMITS_T_MAX: usize = 10_000_000;
/// Both loci start from this allele distribution.
pub const DIVERGENT_LIMITS_START: [f64; 2] = [0.499, 0.501];
const DIVERGENT_LIMITS_W: [[f64; 2]; 2] = [[1.01, 1.0], [1.0, 1.0099603]];
const DIVERGENT_LIMITS_R: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitOutcome {
    pub limit: Option<Genotype>,
    pub steps: Option<usize>,
    pub is_nash: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    /// Uncorrelated PW on the product of the players' strategies.
    pub independent_pw: LimitOutcome,
    /// SR dynamics with `r = 0.5`.
    pub sr: LimitOutcome,
}

impl ConvergenceVerdict {
    /// Both runs converged.
    pub fn conclusive(&self) -> bool {
        self.independent_pw.limit.is_some() && self.sr.limit.is_some()
    }

    pub fn limits_differ(&self) -> bool {
        self.conclusive() && self.independent_pw.limit != self.sr.limit
    }
}

/// Runs the uncorrelated PW and SR (`r = 0.5`) from the same product start
/// on a nearly symmetric coordination game and reports where each settles.
pub fn counterexample_convergence(t_max: usize) -> Result<ConvergenceVerdict> {
    let w = FitnessLandscape::from_rows(&DIVERGENT_LIMITS_W.map(|row| row.to_vec()))?;
    let start = MarginalProfile::new(vec![DIVERGENT_LIMITS_START.to_vec(); 2])?;
    let outcome = |limit: Option<Genotype>, steps: Option<usize>| LimitOutcome {
        is_nash: limit.as_ref().map(|g| is_pure_nash(&w, g)),
        limit,
        steps,
    };

    let (last, steps) = independent_pw_until_converged(&w, &start, t_max, DEFAULT_CONVERGENCE_THRESHOLD)?;
    let independent_pw = outcome(steps.map(|_| argmax_profile(&last)), steps);

    let run = run_until_converged(
        &w,
        &start.product()?,
        DynamicsKind::sr(DIVERGENT_LIMITS_R)?,
        t_max,
        DEFAULT_CONVERGENCE_THRESHOLD,
    )?;
    let sr = outcome(run.converged_at.map(|_| run.last.max_entry().0), run.converged_at);

    Ok(ConvergenceVerdict { independent_pw, sr })
}

fn argmax_profile(m: &MarginalProfile) -> Genotype {
    let shape = Shape::new(m.alleles()).expect("profile has at least two loci");
    let alleles = m
        .vectors()
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
                .0
        })
        .collect();
    Genotype::new(&shape, alleles).expect("indices in range")
}
