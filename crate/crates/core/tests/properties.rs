mod common;

use popmw::dynamics::{rs_step, selection_step, simulate, sr_step, sr_step_k};
use popmw::learners::{
    conditional_utilities, pw_update, utility_alpha, utility_conditional, utility_independent, LearnerConfig,
    PlayerStrategy,
};
use popmw::{DynamicsKind, FitnessLandscape, JointDistribution, MarginalProfile, Norm, Shape};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CAPS: [&[usize]; 3] = [&[5, 4], &[4, 3, 3], &[3, 3, 2, 2]];

/// A random landscape and correlated distribution for k = 2, 3, or 4 loci.
fn instance(seed: u64, k: usize, s: f64) -> (FitnessLandscape, JointDistribution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alleles = common::alleles(&mut rng, CAPS[k - 2]);
    let w = common::landscape(&mut rng, &alleles, s);
    let p = common::joint(&mut rng, &alleles);
    (w, p)
}

fn product_instance(seed: u64, k: usize, s: f64) -> (FitnessLandscape, JointDistribution) {
    let (w, p) = instance(seed, k, s);
    let q = p.wright_projection();
    (w, q)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginals_are_distributions(seed: u64, k in 2usize..=4) {
        let (_, p) = instance(seed, k, 0.3);
        for v in p.marginals().vectors() {
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(v.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn linkage_disequilibrium_sums_to_zero_along_each_locus(seed: u64) {
        let (_, p) = instance(seed, 2, 0.3);
        let d = p.linkage_disequilibrium();
        let n = p.shape().alleles().to_vec();
        for i in 0..n[0] {
            prop_assert!(d[i * n[1]..(i + 1) * n[1]].iter().sum::<f64>().abs() < 1e-14);
        }
        for j in 0..n[1] {
            prop_assert!((0..n[0]).map(|i| d[i * n[1] + j]).sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn average_fitness_lies_in_range(seed: u64, k in 2usize..=4, s in 0.01f64..0.99) {
        let (w, p) = instance(seed, k, s);
        let wbar = w.average_fitness(&p).unwrap();
        prop_assert!(wbar >= w.min() - 1e-15 && wbar <= w.max() + 1e-15);
    }

    #[test]
    fn conditional_marginals_reconstruct_the_joint(seed: u64) {
        let (_, p) = instance(seed, 2, 0.3);
        let x = p.marginal(0).unwrap();
        let n1 = p.shape().n(1);
        for (i, xi) in x.iter().enumerate() {
            let cond = p.conditional_marginal(0, i).unwrap();
            for (j, c) in cond.iter().enumerate() {
                prop_assert!((xi * c - p.probs()[i * n1 + j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_rate_is_pure_selection(seed: u64, k in 2usize..=4) {
        let (w, p) = instance(seed, k, 0.3);
        let sel = selection_step(&w, &p).unwrap();
        let sr = sr_step(&w, &p, 0.0).unwrap();
        let rs = rs_step(&w, &p, 0.0).unwrap();
        prop_assert!(common::max_abs_diff(sr.probs(), sel.probs()) < 1e-15);
        prop_assert!(common::max_abs_diff(rs.probs(), sel.probs()) < 1e-15);
    }

    #[test]
    fn rs_ignores_rate_on_the_wright_manifold(seed: u64, k in 2usize..=4, r in 0.0f64..=1.0) {
        let (w, p) = product_instance(seed, k, 0.3);
        let a = rs_step(&w, &p, r).unwrap();
        let b = rs_step(&w, &p, 0.0).unwrap();
        prop_assert!(common::max_abs_diff(a.probs(), b.probs()) < 1e-12);
        let c = sr_step(&w, &p, r).unwrap().marginals();
        prop_assert!(a.marginals().max_abs_diff(&c).unwrap().0 < 1e-12);
    }

    #[test]
    fn sr_marginals_do_not_depend_on_rate(seed: u64, k in 2usize..=4, r in 0.0f64..=1.0) {
        let (w, p) = instance(seed, k, 0.3);
        let a = sr_step(&w, &p, r).unwrap().marginals();
        let b = selection_step(&w, &p).unwrap().marginals();
        prop_assert!(a.max_abs_diff(&b).unwrap().0 < 1e-14);
    }

    #[test]
    fn asexual_mean_fitness_never_decreases(seed: u64, k in 2usize..=4, s in 0.01f64..0.99) {
        let (w, p) = instance(seed, k, s);
        let t = simulate(&w, &p, DynamicsKind::Asexual, 30, 1.0).unwrap();
        for pair in t.mean_fitness.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-15);
        }
    }

    #[test]
    fn alpha_mix_is_irrelevant_on_the_wright_manifold(seed: u64, alpha in 0.0f64..=1.0) {
        let (w, p) = product_instance(seed, 3, 0.3);
        for player in 0..3 {
            for a in 0..p.shape().n(player) {
                let c = utility_conditional(&w, &p, player, a).unwrap();
                prop_assert!((utility_independent(&w, &p, player, a).unwrap() - c).abs() < 1e-14);
                prop_assert!((utility_alpha(&w, &p, player, a, alpha).unwrap() - c).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pw_stays_on_the_simplex_and_keeps_zeros(
        raw in prop::collection::vec(0.0f64..1.0, 2..8),
        g in prop::collection::vec(0.01f64..2.0, 8),
        zero in 0usize..8,
    ) {
        let mut probs = raw.clone();
        let zero = zero % probs.len();
        probs[zero] = 0.0;
        prop_assume!(probs.iter().sum::<f64>() > 1e-3);
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let x = PlayerStrategy::new(probs).unwrap();
        let cfg = LearnerConfig::parameter_free(0.0).unwrap();
        let next = pw_update(&x, &g[..x.len()], &cfg).unwrap();
        prop_assert!((next.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(next.probs()[zero], 0.0);
    }

    #[test]
    fn pw_shifts_mass_toward_the_best_response(seed: u64) {
        let (w, p) = instance(seed, 2, 0.3);
        let g = conditional_utilities(&w, &p, 0).unwrap();
        let x = PlayerStrategy::new(p.marginal(0).unwrap()).unwrap();
        let next = pw_update(&x, &g, &LearnerConfig::parameter_free(0.0).unwrap()).unwrap();
        let best = (0..g.len()).max_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
        prop_assert!(next.probs()[best] >= x.probs()[best]);
    }

    #[test]
    fn single_locus_landscape_gives_the_replicator(seed: u64, n in 2usize..8, r in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::landscape(&mut rng, &[n, 1], 0.5);
        let p = common::joint(&mut rng, &[n, 1]);
        let wbar = w.average_fitness(&p).unwrap();
        let replicator: Vec<f64> = p.probs().iter().zip(w.values()).map(|(x, v)| x * v / wbar).collect();
        for kind in [DynamicsKind::Asexual, DynamicsKind::Sr(r), DynamicsKind::Rs(r)] {
            let next = kind.step(&w, &p).unwrap();
            prop_assert!(common::max_abs_diff(next.probs(), &replicator) < 1e-15);
        }
    }

    #[test]
    fn general_form_matches_the_two_locus_form(seed: u64, r in 0.0f64..=1.0) {
        let (w, p) = instance(seed, 2, 0.5);
        let a = sr_step_k(&w, &p, r).unwrap();
        let b = sr_step(&w, &p, r / 2.0).unwrap();
        prop_assert!(common::max_abs_diff(a.probs(), b.probs()) < 1e-12);
    }
}

/// Literal double sum over parent pairs and subsets `J`: the offspring
/// taking loci `J` from one parent and the rest from the other.
fn brute_force_sr_k(w: &FitnessLandscape, p: &JointDistribution, r: f64) -> Vec<f64> {
    let shape = p.shape();
    let k = shape.k();
    let wbar = w.average_fitness(p).unwrap();
    let selected: Vec<f64> = p.probs().iter().zip(w.values()).map(|(a, b)| a * b / wbar).collect();
    let subsets = 1usize << k;
    let mut mixed = vec![0.0; shape.len()];
    for (a, &pa) in selected.iter().enumerate() {
        for (b, &pb) in selected.iter().enumerate() {
            for mask in 0..subsets {
                let child: Vec<usize> = (0..k)
                    .map(|j| {
                        let src = if mask >> j & 1 == 1 { a } else { b };
                        shape.allele_at(src, j)
                    })
                    .collect();
                mixed[shape.offset(&child)] += pa * pb / subsets as f64;
            }
        }
    }
    selected
        .iter()
        .zip(&mixed)
        .map(|(s, m)| (1.0 - r) * s + r * m)
        .collect()
}

#[test]
fn general_form_matches_brute_force_at_three_loci() {
    for seed in 0..20 {
        let (w, p) = instance(seed, 3, 0.4);
        for r in [0.0, 0.35, 1.0] {
            let fast = sr_step_k(&w, &p, r).unwrap();
            let slow = brute_force_sr_k(&w, &p, r);
            assert!(common::max_abs_diff(fast.probs(), &slow) < 1e-14, "seed {seed} r {r}");
        }
    }
}

#[test]
fn recombination_shrinks_linkage_created_by_selection() {
    let (w, p) = product_instance(3, 3, 0.2);
    let next = sr_step_k(&w, &p, 1.0).unwrap();
    // Selection correlates the loci and recombination only halves that.
    assert!(next.distance(&next.wright_projection(), Norm::L1).unwrap() > 0.0);
    let sel = selection_step(&w, &p).unwrap();
    let gap_sel = sel.distance(&sel.wright_projection(), Norm::L1).unwrap();
    let gap_next = next.distance(&next.wright_projection(), Norm::L1).unwrap();
    assert!(gap_next < gap_sel);
}

#[test]
fn uniform_profile_is_the_uniform_joint() {
    let shape = Shape::new(vec![3, 4, 2]).unwrap();
    let p = MarginalProfile::uniform(&shape).product().unwrap();
    let u = JointDistribution::uniform(shape);
    assert!(common::max_abs_diff(p.probs(), u.probs()) < 1e-16);
}
