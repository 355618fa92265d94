use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nash::{is_pure_nash, subgame_restrict};
use crate::distribution::{JointDistribution, MarginalProfile};
use crate::dynamics::{run_until_converged, DynamicsKind, DEFAULT_CONVERGENCE_THRESHOLD};
use crate::error::{Error, Result};
use crate::landscape::FitnessLandscape;
use crate::shape::{Genotype, Shape};

/// Landscape with i.i.d. entries uniform on `[1 − s, 1 + s]`.
pub fn random_landscape(alleles: &[usize], s: f64, seed: u64) -> Result<FitnessLandscape> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param("s", s, "selection strength must lie in (0, 1)"));
    }
    let shape = Shape::new(alleles.to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FitnessLandscape::from_fn(shape, |_| rng.random_range(1.0 - s..=1.0 + s))
}

/// Seed of instance `index` under `master`; independent of how instances
/// are scheduled.
pub fn instance_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.random()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialDistribution {
    /// Uniform over all genotypes.
    #[default]
    Uniform,
    /// Product of independently drawn marginals.
    RandomProduct,
    /// Arbitrary joint distribution, generally correlated.
    RandomJoint,
}

impl InitialDistribution {
    pub fn name(self) -> &'static str {
        match self {
            InitialDistribution::Uniform => "uniform",
            InitialDistribution::RandomProduct => "random-product",
            InitialDistribution::RandomJoint => "random-joint",
        }
    }

    /// Draws `P^0` for an instance seed, from a stream separate from the
    /// one that draws the landscape.
    pub fn sample(self, shape: &Shape, seed: u64) -> Result<JointDistribution> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        self.draw(shape, &mut rng)
    }

    fn draw(self, shape: &Shape, rng: &mut impl Rng) -> Result<JointDistribution> {
        // Exponential draws give Dirichlet(1, ..., 1) after normalizing.
        let mut simplex = |n: usize| -> Vec<f64> {
            let v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let sum: f64 = v.iter().sum();
            v.into_iter().map(|x| x / sum).collect()
        };
        match self {
            InitialDistribution::Uniform => Ok(JointDistribution::uniform(shape.clone())),
            InitialDistribution::RandomProduct => {
                MarginalProfile::new(shape.alleles().iter().map(|&n| simplex(n)).collect())?.product()
            }
            InitialDistribution::RandomJoint => JointDistribution::from_weights(shape.clone(), simplex(shape.len())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub alleles: Vec<usize>,
    pub s: f64,
    pub kind: DynamicsKind,
    pub instances: usize,
    pub t_max: usize,
    pub threshold: f64,
    pub seed: u64,
    pub init: InitialDistribution,
}

impl SweepConfig {
    /// 8×5 SR sweep with `r = 0.5` from the uniform distribution.
    pub fn new(s: f64, instances: usize, seed: u64) -> Self {
        SweepConfig {
            alleles: vec![8, 5],
            s,
            kind: DynamicsKind::Sr(0.5),
            instances,
            t_max: 100_000,
            threshold: DEFAULT_CONVERGENCE_THRESHOLD,
            seed,
            init: InitialDistribution::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Shape::new(self.alleles.clone())?;
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::param("s", self.s, "selection strength must lie in (0, 1)"));
        }
        if self.instances == 0 {
            return Err(Error::param("instances", 0.0, "at least one instance is required"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::param("threshold", self.threshold, "must lie in (0, 1)"));
        }
        match self.kind {
            DynamicsKind::Sr(r) => DynamicsKind::sr(r).map(drop),
            DynamicsKind::Rs(r) => DynamicsKind::rs(r).map(drop),
            DynamicsKind::Asexual => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub instance: usize,
    pub seed: u64,
    pub converged: bool,
    pub t_conv: Option<usize>,
    /// `(w_limit − 1)/(max w − 1)` for converged instances.
    pub quality: Option<f64>,
    pub limit_genotype: Option<Genotype>,
    /// Whether the limit is a pure Nash equilibrium of the game restricted
    /// to the support of `P^0`.
    pub is_nash: Option<bool>,
    /// Step failure, if any; such instances count as not converged.
    pub error: Option<String>,
}

fn run_instance(cfg: &SweepConfig, instance: usize) -> SweepRecord {
    let seed = instance_seed(cfg.seed, instance as u64);
    let mut record = SweepRecord {
        instance,
        seed,
        converged: false,
        t_conv: None,
        quality: None,
        limit_genotype: None,
        is_nash: None,
        error: None,
    };
    if let Err(e) = fill_instance(cfg, &mut record) {
        record.error = Some(e.to_string());
    }
    record
}

fn fill_instance(cfg: &SweepConfig, record: &mut SweepRecord) -> Result<()> {
    let w = random_landscape(&cfg.alleles, cfg.s, record.seed)?;
    let p0 = cfg.init.sample(w.shape(), record.seed)?;
    let run = run_until_converged(&w, &p0, cfg.kind, cfg.t_max, cfg.threshold)?;
    if let Some(t) = run.converged_at {
        let (limit, _) = run.last.max_entry();
        let sub = subgame_restrict(&w, &p0)?;
        record.converged = true;
        record.t_conv = Some(t);
        record.quality = Some((w.get(&limit) - 1.0) / (w.max() - 1.0));
        record.is_nash = Some(sub.from_original(&limit).is_some_and(|g| is_pure_nash(&sub.game, &g)));
        record.limit_genotype = Some(limit);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub instances: usize,
    pub converged: usize,
    /// `(T, F(T))`: fraction of all instances converged within `T`
    /// generations, at every distinct convergence time.
    pub f_t: Vec<(usize, f64)>,
    /// `(Q, F(Q))`: fraction of converged instances with quality at most
    /// `Q`, at every distinct quality.
    pub f_q: Vec<(f64, f64)>,
    /// Median convergence time, counting censored instances as infinite.
    pub median_t_conv: Option<usize>,
}

impl SweepSummary {
    pub fn from_records(records: &[SweepRecord]) -> Self {
        let instances = records.len();
        let mut times: Vec<usize> = records.iter().filter_map(|r| r.t_conv).collect();
        times.sort_unstable();
        let mut qualities: Vec<f64> = records.iter().filter_map(|r| r.quality).collect();
        qualities.sort_by(f64::total_cmp);
        let converged = times.len();

        let mut f_t: Vec<(usize, f64)> = Vec::new();
        for (i, &t) in times.iter().enumerate() {
            let frac = (i + 1) as f64 / instances as f64;
            match f_t.last_mut() {
                Some(last) if last.0 == t => last.1 = frac,
                _ => f_t.push((t, frac)),
            }
        }
        let mut f_q: Vec<(f64, f64)> = Vec::new();
        for (i, &q) in qualities.iter().enumerate() {
            let frac = (i + 1) as f64 / converged as f64;
            match f_q.last_mut() {
                Some(last) if last.0 == q => last.1 = frac,
                _ => f_q.push((q, frac)),
            }
        }
        let median_t_conv = {
            let mid = instances.div_ceil(2);
            (mid >= 1 && mid <= converged).then(|| times[mid - 1])
        };
        SweepSummary {
            instances,
            converged,
            f_t,
            f_q,
            median_t_conv,
        }
    }
}

/// Runs every instance of `cfg` on `workers` threads (0 picks rayon's
/// default). Records come back sorted by instance index and are identical
/// for any worker count.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Format(format!("thread pool: {e}")))?;
    let mut records: Vec<SweepRecord> = pool.install(|| {
        (0..cfg.instances)
            .into_par_iter()
            .map(|i| run_instance(cfg, i))
            .collect()
    });
    records.sort_by_key(|r| r.instance);
    let summary = SweepSummary::from_records(&records);
    Ok((records, summary))
}

/// Two-sample Kolmogorov distance `sup_x |F_a(x) − F_b(x)|`.
pub fn kolmogorov_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut best: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_landscape_range_and_determinism() {
        let a = random_landscape(&[8, 5], 0.1, 7).unwrap();
        assert!(a.values().iter().all(|&w| (0.9..=1.1).contains(&w)));
        assert!(a.selection_strength() <= 0.1);
        assert_eq!(a, random_landscape(&[8, 5], 0.1, 7).unwrap());
        assert_ne!(a, random_landscape(&[8, 5], 0.1, 8).unwrap());
        assert!(random_landscape(&[8, 5], 0.0, 7).is_err());
    }

    #[test]
    fn instance_seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| instance_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(instance_seed(42, 3), instance_seed(42, 3));
    }

    #[test]
    fn kolmogorov() {
        assert_eq!(kolmogorov_distance(&[0.1, 0.2], &[0.1, 0.2]), 0.0);
        assert_eq!(kolmogorov_distance(&[0.1, 0.2], &[0.3, 0.4]), 1.0);
        assert!((kolmogorov_distance(&[0.1, 0.3], &[0.2, 0.4]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn initial_distributions() {
        let shape = Shape::new(vec![3, 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prod = InitialDistribution::RandomProduct.draw(&shape, &mut rng).unwrap();
        assert!(prod.linkage_disequilibrium().iter().all(|d| d.abs() < 1e-15));
        let joint = InitialDistribution::RandomJoint.draw(&shape, &mut rng).unwrap();
        assert!(joint.linkage_disequilibrium().iter().any(|d| d.abs() > 1e-6));
    }

    #[test]
    fn small_sweep_summary() {
        let mut cfg = SweepConfig::new(0.3, 40, 5);
        cfg.alleles = vec![4, 3];
        let (records, summary) = run_sweep(&cfg, 2).unwrap();
        assert_eq!(records.len(), 40);
        assert!(records.iter().enumerate().all(|(i, r)| r.instance == i));
        assert_eq!(summary.converged, records.iter().filter(|r| r.converged).count());
        assert!(summary.f_t.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        assert!(summary.f_q.windows(2).all(|w| w[0].1 <= w[1].1));
        for r in records.iter().filter(|r| r.converged) {
            assert_eq!(r.is_nash, Some(true));
            assert!(r.quality.unwrap() <= 1.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SweepConfig::new(0.1, 10, 0);
        assert!(cfg.validate().is_ok());
        cfg.threshold = 1.0;
        assert!(cfg.validate().is_err());
        cfg = SweepConfig::new(0.1, 0, 0);
        assert!(cfg.validate().is_err());
    }
}
