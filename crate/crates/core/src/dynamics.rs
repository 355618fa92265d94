//! Discrete-generation update rules for haploid populations.
//!
//! Every step builds unnormalized genotype weights and divides by their
//! computed total, even where the formula is normalized algebraically, so
//! that long trajectories do not drift off the simplex.

use serde::{Deserialize, Serialize};

use crate::distribution::{JointDistribution, MarginalProfile, Norm};
use crate::error::{Error, Result};
use crate::landscape::{dot, FitnessLandscape};
use crate::shape::{LocusSet, Shape};

/// Convergence is declared once some genotype exceeds this frequency.
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 1.0 - 1e-5;

/// ℓ1 tolerance for [`is_stable_state`].
pub const DEFAULT_STABILITY_TOL: f64 = 1e-10;

/// Which update rule drives the population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dynamics", content = "r", rename_all = "lowercase")]
pub enum DynamicsKind {
    /// Selection only; offspring clone their parent.
    Asexual,
    /// Selection, then recombination at rate `r`.
    Sr(f64),
    /// Recombination at rate `r`, then selection.
    Rs(f64),
}

impl DynamicsKind {
    pub fn sr(r: f64) -> Result<Self> {
        check_rate(r).map(|_| DynamicsKind::Sr(r))
    }

    pub fn rs(r: f64) -> Result<Self> {
        check_rate(r).map(|_| DynamicsKind::Rs(r))
    }

    /// Recombination rate; zero for asexual reproduction.
    pub fn rate(&self) -> f64 {
        match *self {
            DynamicsKind::Asexual => 0.0,
            DynamicsKind::Sr(r) | DynamicsKind::Rs(r) => r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DynamicsKind::Asexual => "asexual",
            DynamicsKind::Sr(_) => "sr",
            DynamicsKind::Rs(_) => "rs",
        }
    }

    pub fn step(&self, w: &FitnessLandscape, p: &JointDistribution) -> Result<JointDistribution> {
        match *self {
            DynamicsKind::Asexual => selection_step(w, p),
            DynamicsKind::Sr(r) => sr_step(w, p, r),
            DynamicsKind::Rs(r) => rs_step(w, p, r),
        }
    }
}

fn check_rate(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::param("r", r, "recombination rate must lie in [0, 1]"))
    }
}

/// `w ∘ p` and its total `w̄`.
fn selected_weights(w: &FitnessLandscape, p: &JointDistribution) -> Result<(Vec<f64>, f64)> {
    w.shape().ensure_same(p.shape())?;
    let f: Vec<f64> = w.values().iter().zip(p.probs()).map(|(a, b)| a * b).collect();
    let wbar = f.iter().sum();
    Ok((f, wbar))
}

/// `p^S_{i_K} = w_{i_K} p_{i_K} / w̄`.
pub fn selection_step(w: &FitnessLandscape, p: &JointDistribution) -> Result<JointDistribution> {
    let (f, _) = selected_weights(w, p)?;
    JointDistribution::from_weights(p.shape().clone(), f)
}

/// Full recombination without selection: the product of the marginals.
pub fn recombination_step(p: &JointDistribution) -> JointDistribution {
    p.wright_projection()
}

/// Two-locus selection-before-recombination step,
/// `r·p^SR + (1−r)·p^S` with `p^SR_{ij} = (Σ_l p_il w_il)(Σ_k p_kj w_kj) / w̄²`.
///
/// Landscapes with `k != 2` are handed to [`sr_step_k`] with the same `r`.
pub fn sr_step(w: &FitnessLandscape, p: &JointDistribution, r: f64) -> Result<JointDistribution> {
    check_rate(r)?;
    w.shape().ensure_same(p.shape())?;
    if r == 0.0 {
        return selection_step(w, p);
    }
    if p.shape().k() != 2 {
        return sr_step_k(w, p, r);
    }
    let (f, wbar) = selected_weights(w, p)?;
    let (rows, cols) = (p.shape().n(0), p.shape().n(1));
    let mut row_sums = vec![0.0; rows];
    let mut col_sums = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            row_sums[i] += f[i * cols + j];
            col_sums[j] += f[i * cols + j];
        }
    }
    let wbar2 = wbar * wbar;
    let mut out = Vec::with_capacity(f.len());
    for i in 0..rows {
        for j in 0..cols {
            out.push(r * row_sums[i] * col_sums[j] / wbar2 + (1.0 - r) * f[i * cols + j] / wbar);
        }
    }
    JointDistribution::from_weights(p.shape().clone(), out)
}

/// General k-locus selection-before-recombination step. The recombining
/// fraction `r` of offspring inherits the loci in `J` from one selected
/// parent and the rest from another, averaged over all `2^k` subsets `J`
/// (so `J = ∅` and `J = K` reproduce a parent unchanged).
///
/// For `J` fixed the sum over the second parent factorizes into the
/// selected mass projected onto `J` times that projected onto `-J`.
pub fn sr_step_k(w: &FitnessLandscape, p: &JointDistribution, r: f64) -> Result<JointDistribution> {
    check_rate(r)?;
    if r == 0.0 {
        return selection_step(w, p);
    }
    let (f, wbar) = selected_weights(w, p)?;
    let shape = p.shape();
    let k = shape.k();
    let mut crossover = vec![0.0; f.len()];
    for loci in LocusSet::all_subsets(k) {
        let on = project(shape, &f, loci);
        let off = project(shape, &f, loci.complement(k));
        for (flat, c) in crossover.iter_mut().enumerate() {
            *c += on.at(shape, flat) * off.at(shape, flat);
        }
    }
    let subsets = (1u64 << k) as f64;
    let wbar2 = wbar * wbar;
    let out = crossover
        .iter()
        .zip(&f)
        .map(|(c, fi)| r * c / (subsets * wbar2) + (1.0 - r) * fi / wbar)
        .collect();
    JointDistribution::from_weights(shape.clone(), out)
}

/// A tensor summed down onto a subset of loci.
struct Projection {
    loci: LocusSet,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl Projection {
    fn at(&self, shape: &Shape, flat: usize) -> f64 {
        self.values[sub_offset(shape, flat, self.loci, &self.strides)]
    }
}

fn project(shape: &Shape, f: &[f64], loci: LocusSet) -> Projection {
    let mut strides = vec![0; shape.k()];
    let mut len = 1;
    for j in (0..shape.k()).rev() {
        if loci.contains(j) {
            strides[j] = len;
            len *= shape.n(j);
        }
    }
    let mut values = vec![0.0; len];
    for (flat, &v) in f.iter().enumerate() {
        values[sub_offset(shape, flat, loci, &strides)] += v;
    }
    Projection { loci, strides, values }
}

#[inline]
fn sub_offset(shape: &Shape, flat: usize, loci: LocusSet, strides: &[usize]) -> usize {
    (0..shape.k())
        .filter(|&j| loci.contains(j))
        .map(|j| shape.allele_at(flat, j) * strides[j])
        .sum()
}

/// Unnormalized RS weights `w_{i_K}(r·Π_j x_{i_j} + (1−r)·p_{i_K})`.
pub fn rs_weights(w: &FitnessLandscape, p: &JointDistribution, r: f64) -> Result<Vec<f64>> {
    check_rate(r)?;
    w.shape().ensure_same(p.shape())?;
    let product = p.wright_projection();
    Ok(w.values()
        .iter()
        .zip(p.probs().iter().zip(product.probs()))
        .map(|(wi, (pi, qi))| wi * (r * qi + (1.0 - r) * pi))
        .collect())
}

/// The same weights written through linkage disequilibrium,
/// `w_{i_K}(p_{i_K} − r·D_{i_K})`.
pub fn rs_weights_via_linkage(w: &FitnessLandscape, p: &JointDistribution, r: f64) -> Result<Vec<f64>> {
    check_rate(r)?;
    w.shape().ensure_same(p.shape())?;
    Ok(w.values()
        .iter()
        .zip(p.probs().iter().zip(p.linkage_disequilibrium()))
        .map(|(wi, (pi, d))| wi * (pi - r * d))
        .collect())
}

/// RS normalizer `w̄^R = Σ w (p − r·D)`.
pub fn rs_normalizer(w: &FitnessLandscape, p: &JointDistribution, r: f64) -> Result<f64> {
    Ok(rs_weights_via_linkage(w, p, r)?.iter().sum())
}

/// Recombination-before-selection step, for any number of loci.
///
/// At `r = 0` every step function defers to [`selection_step`], so the
/// three agree bit for bit there.
pub fn rs_step(w: &FitnessLandscape, p: &JointDistribution, r: f64) -> Result<JointDistribution> {
    if r == 0.0 {
        return selection_step(w, p);
    }
    let q = rs_weights(w, p, r)?;
    JointDistribution::from_weights(p.shape().clone(), q)
}

/// True iff one application of `kind` moves `p` by at most `tol` in ℓ1.
pub fn is_stable_state(w: &FitnessLandscape, p: &JointDistribution, kind: DynamicsKind, tol: f64) -> Result<bool> {
    let next = kind.step(w, p)?;
    Ok(next.distance(p, Norm::L1)? <= tol)
}

/// Recorded run `P^0..P^T` of one dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: DynamicsKind,
    pub states: Vec<JointDistribution>,
    pub mean_fitness: Vec<f64>,
    pub marginals: Vec<MarginalProfile>,
    /// First `t` at which some genotype frequency exceeded the threshold.
    pub converged_at: Option<usize>,
    /// Whether the last state is a stable state at [`DEFAULT_STABILITY_TOL`].
    pub stable: bool,
}

impl Trajectory {
    /// Number of update steps, `T`.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn last(&self) -> &JointDistribution {
        self.states.last().expect("trajectory holds P^0")
    }
}

fn converged(p: &JointDistribution, threshold: f64) -> bool {
    p.probs().iter().any(|&x| x > threshold)
}

/// Runs exactly `steps` updates from `p0`, recording every generation.
pub fn simulate(
    w: &FitnessLandscape,
    p0: &JointDistribution,
    kind: DynamicsKind,
    steps: usize,
    threshold: f64,
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::param("steps", 0.0, "at least one step is required"));
    }
    w.shape().ensure_same(p0.shape())?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(p0.clone());
    for t in 0..steps {
        let next = kind.step(w, &states[t])?;
        states.push(next);
    }
    let mean_fitness = states.iter().map(|p| dot(w.values(), p.probs())).collect();
    let marginals = states.iter().map(JointDistribution::marginals).collect();
    let converged_at = states.iter().position(|p| converged(p, threshold));
    let stable = is_stable_state(w, states.last().unwrap(), kind, DEFAULT_STABILITY_TOL)?;
    Ok(Trajectory {
        kind,
        states,
        mean_fitness,
        marginals,
        converged_at,
        stable,
    })
}

/// Outcome of an unrecorded run that stops at convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub last: JointDistribution,
    /// Steps actually applied.
    pub steps: usize,
    pub converged_at: Option<usize>,
}

/// Iterates `kind` until some genotype frequency exceeds `threshold` or
/// `max_steps` updates have been applied, keeping only the current state.
pub fn run_until_converged(
    w: &FitnessLandscape,
    p0: &JointDistribution,
    kind: DynamicsKind,
    max_steps: usize,
    threshold: f64,
) -> Result<ConvergenceRun> {
    w.shape().ensure_same(p0.shape())?;
    let mut p = p0.clone();
    for t in 0..=max_steps {
        if converged(&p, threshold) {
            return Ok(ConvergenceRun {
                last: p,
                steps: t,
                converged_at: Some(t),
            });
        }
        if t < max_steps {
            p = kind.step(w, &p)?;
        }
    }
    Ok(ConvergenceRun {
        last: p,
        steps: max_steps,
        converged_at: None,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::fixtures::{reference_initial, reference_landscape};
    use crate::shape::Genotype;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?} at tol {tol}");
        }
    }

    // Exact rational recomputations from the 3×2 example, frozen here.
    const SELECTED: [f64; 6] = [
        0.1 / 1.005,
        0.075 / 1.005,
        0.15 / 1.005,
        0.18 / 1.005,
        0.26 / 1.005,
        0.24 / 1.005,
    ];
    const SR_FULL: [f64; 6] = [
        0.08836414940224252,
        0.085765203831588324,
        0.16662953887280019,
        0.1617286700824237,
        0.25246899829212149,
        0.24504343951882379,
    ];
    const SR_HALF: [f64; 6] = [
        0.093933318482215783,
        0.080196034751615061,
        0.15794163510804188,
        0.17041657384718201,
        0.25558773297690651,
        0.24192470483403877,
    ];
    const SR_HALF_TWICE: [f64; 6] = [
        0.079291673739356347,
        0.042416967237009932,
        0.22824403674948585,
        0.17258533515301239,
        0.29460851930786058,
        0.18285346781327494,
    ];
    const RS_HALF_TWICE: [f64; 6] = [
        0.085297191598395203,
        0.036411449377971077,
        0.21513098007484577,
        0.18569839182765246,
        0.30171605812346181,
        0.17574592899767372,
    ];

    #[test]
    fn selection_on_reference() {
        let p = selection_step(&reference_landscape(), &reference_initial()).unwrap();
        assert_close(p.probs(), &SELECTED, 1e-15);
        assert_close(p.probs(), &[0.0995, 0.0746, 0.1493, 0.1791, 0.2587, 0.2388], 5e-4);
    }

    #[test]
    fn neutral_and_point_selection_are_identity() {
        let p = reference_initial();
        let ones = FitnessLandscape::new(vec![3, 2], vec![1.0; 6]).unwrap();
        assert_close(selection_step(&ones, &p).unwrap().probs(), p.probs(), 1e-16);
        let point = JointDistribution::point(p.shape().clone(), &Genotype(vec![2, 1])).unwrap();
        assert_eq!(selection_step(&reference_landscape(), &point).unwrap(), point);
    }

    #[test]
    fn sr_on_reference() {
        let w = reference_landscape();
        let p = reference_initial();
        assert_close(sr_step(&w, &p, 1.0).unwrap().probs(), &SR_FULL, 1e-15);
        assert_close(sr_step(&w, &p, 0.5).unwrap().probs(), &SR_HALF, 1e-15);
        assert_close(sr_step(&w, &p, 0.0).unwrap().probs(), &SELECTED, 1e-15);
        let p1 = sr_step(&w, &p, 0.5).unwrap();
        assert!((w.average_fitness(&p1).unwrap() - 1.1012474938739141).abs() < 1e-14);
        assert!((p1.linkage_disequilibrium()[0] - 0.0055691690799732681).abs() < 1e-15);
    }

    #[test]
    fn sr_k_matches_two_locus_at_half_rate() {
        let w = reference_landscape();
        let p = reference_initial();
        for r in [0.0, 0.3, 0.5, 1.0] {
            let a = sr_step_k(&w, &p, r).unwrap();
            let b = sr_step(&w, &p, r / 2.0).unwrap();
            assert_close(a.probs(), b.probs(), 1e-15);
        }
    }

    #[test]
    fn rs_on_reference() {
        let w = reference_landscape();
        let p = reference_initial();
        for r in [0.0, 0.5, 1.0] {
            assert_close(rs_step(&w, &p, r).unwrap().probs(), &SELECTED, 1e-15);
        }
        let p1 = rs_step(&w, &p, 0.5).unwrap();
        let p2 = rs_step(&w, &p1, 0.5).unwrap();
        assert_close(p2.probs(), &RS_HALF_TWICE, 1e-15);
        assert!((rs_normalizer(&w, &p1, 0.5).unwrap() - 1.1012474938739141).abs() < 1e-14);
        let raw: f64 = rs_weights(&w, &p1, 0.5).unwrap().iter().sum();
        assert!((raw - rs_normalizer(&w, &p1, 0.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rs_normalizer_reduces_to_average_fitness() {
        let w = reference_landscape();
        let p = reference_initial();
        let wbar = w.average_fitness(&p).unwrap();
        assert!((rs_normalizer(&w, &p, 0.7).unwrap() - wbar).abs() < 1e-15);
        let corr = JointDistribution::from_rows(&[vec![0.3, 0.0], vec![0.1, 0.2], vec![0.0, 0.4]]).unwrap();
        assert_eq!(
            rs_normalizer(&w, &corr, 0.0).unwrap(),
            w.average_fitness(&corr).unwrap()
        );
    }

    #[test]
    fn two_sr_steps_on_reference() {
        let t = simulate(
            &reference_landscape(),
            &reference_initial(),
            DynamicsKind::Sr(0.5),
            2,
            DEFAULT_CONVERGENCE_THRESHOLD,
        )
        .unwrap();
        assert_close(t.states[2].probs(), &SR_HALF_TWICE, 1e-15);
        assert_eq!(t.steps(), 2);
        assert_eq!(t.converged_at, None);
        assert!((t.mean_fitness[0] - 1.005).abs() < 1e-15);
    }

    #[test]
    fn neutral_simulation_is_constant() {
        let ones = FitnessLandscape::new(vec![3, 2], vec![1.0; 6]).unwrap();
        let p = reference_initial();
        let t = simulate(&ones, &p, DynamicsKind::Sr(0.0), 5, DEFAULT_CONVERGENCE_THRESHOLD).unwrap();
        assert!(t.states.iter().all(|s| s.distance(&p, Norm::Linf).unwrap() < 1e-16));
        assert!(t.stable);
    }

    #[test]
    fn point_start_converges_immediately() {
        let p = JointDistribution::point(Shape::new(vec![3, 2]).unwrap(), &Genotype(vec![0, 1])).unwrap();
        let t = simulate(
            &reference_landscape(),
            &p,
            DynamicsKind::Rs(0.5),
            3,
            DEFAULT_CONVERGENCE_THRESHOLD,
        )
        .unwrap();
        assert_eq!(t.converged_at, Some(0));
        let run = run_until_converged(
            &reference_landscape(),
            &p,
            DynamicsKind::Rs(0.5),
            10,
            DEFAULT_CONVERGENCE_THRESHOLD,
        )
        .unwrap();
        assert_eq!((run.steps, run.converged_at), (0, Some(0)));
    }

    #[test]
    fn stability() {
        let w = reference_landscape();
        let p = reference_initial();
        let point = JointDistribution::point(p.shape().clone(), &Genotype(vec![1, 1])).unwrap();
        for kind in [DynamicsKind::Asexual, DynamicsKind::Sr(0.5), DynamicsKind::Rs(1.0)] {
            assert!(is_stable_state(&w, &point, kind, DEFAULT_STABILITY_TOL).unwrap());
        }
        let ones = FitnessLandscape::new(vec![3, 2], vec![1.0; 6]).unwrap();
        assert!(is_stable_state(&ones, &p, DynamicsKind::Asexual, DEFAULT_STABILITY_TOL).unwrap());
        assert!(!is_stable_state(&w, &p, DynamicsKind::Sr(0.5), 1e-6).unwrap());
    }

    #[test]
    fn invalid_inputs() {
        let w = reference_landscape();
        let p = reference_initial();
        assert!(DynamicsKind::sr(1.5).is_err());
        assert!(sr_step(&w, &p, -0.1).is_err());
        let other = JointDistribution::uniform(Shape::new(vec![2, 3]).unwrap());
        assert!(matches!(rs_step(&w, &other, 0.5), Err(Error::ShapeMismatch { .. })));
        assert!(simulate(&w, &p, DynamicsKind::Asexual, 0, 0.5).is_err());
    }
}
