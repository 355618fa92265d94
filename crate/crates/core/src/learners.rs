//! Multiplicative-weights learners for the locus game.
//!
//! Every player `j` sees the joint distribution `P^t` and scores each of its
//! actions either conditionally on that action (`g̲`, accounting for the
//! observed correlation), as if the others played their marginals
//! independently (`ḡ`), or by the mix `α·ḡ + (1−α)·g̲`. Actions with zero
//! probability score 0 and stay extinct under every update rule.

use serde::{Deserialize, Serialize};

use crate::distribution::{JointDistribution, MarginalProfile};
use crate::error::{Error, Result};
use crate::landscape::GameMatrix;
use crate::shape::Shape;

/// How the multiplicative factor depends on utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PwVariant {
    /// `x_i · g_i`, the `ε → ∞` limit of ε-PW.
    ParameterFree,
    /// `x_i · (1 + ε g_i)`.
    Epsilon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateRule {
    /// Polynomial weights: linear in utility.
    Pw,
    /// Exponential weights, `x_i · (1 + ε)^{g_i}`.
    Hedge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    variant: PwVariant,
    alpha: f64,
    rule: UpdateRule,
}

impl LearnerConfig {
    pub fn new(variant: PwVariant, alpha: f64, rule: UpdateRule) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::param("alpha", alpha, "must lie in [0, 1]"));
        }
        match variant {
            PwVariant::Epsilon(eps) if !(eps > 0.0 && eps.is_finite()) => {
                return Err(Error::param("epsilon", eps, "must be positive"));
            }
            PwVariant::ParameterFree if rule == UpdateRule::Hedge => {
                return Err(Error::param("epsilon", f64::INFINITY, "hedge needs a finite epsilon"));
            }
            _ => {}
        }
        Ok(LearnerConfig { variant, alpha, rule })
    }

    /// Parameter-free PW with correlation mix `alpha`.
    pub fn parameter_free(alpha: f64) -> Result<Self> {
        Self::new(PwVariant::ParameterFree, alpha, UpdateRule::Pw)
    }

    pub fn variant(&self) -> PwVariant {
        self.variant
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rule(&self) -> UpdateRule {
        self.rule
    }
}

/// A mixed strategy over one player's actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerStrategy(Vec<f64>);

impl PlayerStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Format("empty strategy".into()));
        }
        if let Some((index, &value)) = probs.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::NegativeProbability { index, value });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > crate::distribution::RENORMALIZE_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(PlayerStrategy(probs.into_iter().map(|p| p / sum).collect()))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `g̲_i`: expected payoff of action `i` of `player`, conditioned on that
/// action under `P`, for every action.
pub fn conditional_utilities(g: &GameMatrix, p: &JointDistribution, player: usize) -> Result<Vec<f64>> {
    g.shape().ensure_same(p.shape())?;
    let shape = p.shape();
    shape.check_locus(player)?;
    let mut mass = vec![0.0; shape.n(player)];
    let mut payoff = vec![0.0; shape.n(player)];
    for (flat, (&pi, &gi)) in p.probs().iter().zip(g.values()).enumerate() {
        let a = shape.allele_at(flat, player);
        mass[a] += pi;
        payoff[a] += pi * gi;
    }
    Ok(payoff
        .iter()
        .zip(&mass)
        .map(|(&u, &x)| if x > 0.0 { u / x } else { 0.0 })
        .collect())
}

/// `ḡ_i`: expected payoff of action `i` when every other player draws
/// independently from its marginal under `P`.
pub fn independent_utilities(g: &GameMatrix, p: &JointDistribution, player: usize) -> Result<Vec<f64>> {
    g.shape().ensure_same(p.shape())?;
    profile_utilities(g, &p.marginals(), player)
}

/// `ḡ_i` against an explicit profile of independent mixed strategies.
pub fn profile_utilities(g: &GameMatrix, profile: &MarginalProfile, player: usize) -> Result<Vec<f64>> {
    let shape = g.shape();
    check_profile(shape, profile)?;
    shape.check_locus(player)?;
    let own = profile.locus(player);
    let mut out = vec![0.0; shape.n(player)];
    for (flat, &gi) in g.values().iter().enumerate() {
        let a = shape.allele_at(flat, player);
        let weight: f64 = (0..shape.k())
            .filter(|&j| j != player)
            .map(|j| profile.locus(j)[shape.allele_at(flat, j)])
            .product();
        out[a] += weight * gi;
    }
    for (u, &x) in out.iter_mut().zip(own) {
        if x <= 0.0 {
            *u = 0.0;
        }
    }
    Ok(out)
}

/// `g^{(α)} = α·ḡ + (1−α)·g̲` for every action.
pub fn alpha_utilities(g: &GameMatrix, p: &JointDistribution, player: usize, alpha: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::param("alpha", alpha, "must lie in [0, 1]"));
    }
    let cond = conditional_utilities(g, p, player)?;
    if alpha == 0.0 {
        return Ok(cond);
    }
    let ind = independent_utilities(g, p, player)?;
    if alpha == 1.0 {
        return Ok(ind);
    }
    Ok(ind
        .iter()
        .zip(&cond)
        .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
        .collect())
}

fn check_action(g: &GameMatrix, player: usize, action: usize) -> Result<()> {
    g.shape().check_allele(player, action)
}

pub fn utility_conditional(g: &GameMatrix, p: &JointDistribution, player: usize, action: usize) -> Result<f64> {
    check_action(g, player, action)?;
    Ok(conditional_utilities(g, p, player)?[action])
}

pub fn utility_independent(g: &GameMatrix, p: &JointDistribution, player: usize, action: usize) -> Result<f64> {
    check_action(g, player, action)?;
    Ok(independent_utilities(g, p, player)?[action])
}

pub fn utility_alpha(g: &GameMatrix, p: &JointDistribution, player: usize, action: usize, alpha: f64) -> Result<f64> {
    check_action(g, player, action)?;
    Ok(alpha_utilities(g, p, player, alpha)?[action])
}

fn check_profile(shape: &Shape, profile: &MarginalProfile) -> Result<()> {
    if profile.alleles() == shape.alleles() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: shape.alleles().to_vec(),
            found: profile.alleles(),
        })
    }
}

/// One polynomial-weights (or Hedge, per `cfg.rule`) step.
pub fn pw_update(x: &PlayerStrategy, g: &[f64], cfg: &LearnerConfig) -> Result<PlayerStrategy> {
    match (cfg.rule, cfg.variant) {
        (UpdateRule::Hedge, PwVariant::Epsilon(eps)) => hedge_update(x, g, eps),
        (UpdateRule::Hedge, PwVariant::ParameterFree) => {
            Err(Error::param("epsilon", f64::INFINITY, "hedge needs a finite epsilon"))
        }
        (UpdateRule::Pw, PwVariant::ParameterFree) => multiply(x, g, |u| u),
        (UpdateRule::Pw, PwVariant::Epsilon(eps)) => multiply(x, g, |u| 1.0 + eps * u),
    }
}

/// `x_i (1 + ε)^{g_i}`, normalized.
pub fn hedge_update(x: &PlayerStrategy, g: &[f64], eps: f64) -> Result<PlayerStrategy> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("epsilon", eps, "must be positive"));
    }
    let base = (1.0 + eps).ln();
    multiply(x, g, |u| (base * u).exp())
}

fn multiply(x: &PlayerStrategy, g: &[f64], factor: impl Fn(f64) -> f64) -> Result<PlayerStrategy> {
    if g.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: g.len(),
        });
    }
    let mut out = Vec::with_capacity(x.len());
    for (&xi, &gi) in x.0.iter().zip(g) {
        if xi == 0.0 {
            out.push(0.0);
            continue;
        }
        let f = factor(gi);
        if !(f >= 0.0 && f.is_finite()) {
            return Err(Error::param(
                "utility",
                gi,
                "update factor must be nonnegative on the support",
            ));
        }
        out.push(xi * f);
    }
    let sum: f64 = out.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::DegenerateUpdate { normalizer: sum });
    }
    out.iter_mut().for_each(|v| *v /= sum);
    Ok(PlayerStrategy(out))
}

/// Per-player strategy sequences `x^0..x^T` of a co-simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTrajectory {
    /// Indexed `[player][t]`.
    pub players: Vec<Vec<PlayerStrategy>>,
}

impl StrategyTrajectory {
    pub fn steps(&self) -> usize {
        self.players[0].len() - 1
    }

    pub fn profile_at(&self, t: usize) -> MarginalProfile {
        MarginalProfile::new(self.players.iter().map(|s| s[t].0.clone()).collect())
            .expect("learner strategies stay on the simplex")
    }
}

/// Runs one learner per locus alongside an observed joint trajectory.
///
/// Strategies start at the marginals of `P^0`; strategy `x^{t+1}` is the
/// update of `x^t` with utilities computed from `P^t`, so the output has as
/// many entries per player as `states`.
pub fn cosimulate_learners(
    g: &GameMatrix,
    states: &[JointDistribution],
    cfg: &LearnerConfig,
) -> Result<StrategyTrajectory> {
    let first = states
        .first()
        .ok_or(Error::TrajectoryTooShort { needed: 1, found: 0 })?;
    for p in states {
        g.shape().ensure_same(p.shape())?;
    }
    let k = g.shape().k();
    let mut players: Vec<Vec<PlayerStrategy>> = (0..k)
        .map(|j| Ok(vec![PlayerStrategy(first.marginal(j)?)]))
        .collect::<Result<_>>()?;
    for p in &states[..states.len() - 1] {
        for (j, seq) in players.iter_mut().enumerate() {
            let u = alpha_utilities(g, p, j, cfg.alpha)?;
            let next = pw_update(seq.last().unwrap(), &u, cfg)?;
            seq.push(next);
        }
    }
    Ok(StrategyTrajectory { players })
}

/// One step of the uncorrelated parameter-free PW, where every player scores
/// actions against the product of the current strategies.
pub fn independent_pw_step(g: &GameMatrix, profile: &MarginalProfile) -> Result<MarginalProfile> {
    let cfg = LearnerConfig::parameter_free(1.0)?;
    let next = (0..profile.k())
        .map(|j| {
            let u = profile_utilities(g, profile, j)?;
            let x = PlayerStrategy(profile.locus(j).to_vec());
            Ok(pw_update(&x, &u, &cfg)?.0)
        })
        .collect::<Result<Vec<_>>>()?;
    MarginalProfile::new(next)
}

/// `T` steps of the uncorrelated PW from `x0`; returns `x^0..x^T`.
pub fn independent_pw_simulate(g: &GameMatrix, x0: &MarginalProfile, steps: usize) -> Result<Vec<MarginalProfile>> {
    check_profile(g.shape(), x0)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0.clone());
    for t in 0..steps {
        let next = independent_pw_step(g, &out[t])?;
        out.push(next);
    }
    Ok(out)
}

/// Iterates the uncorrelated PW until the induced product distribution puts
/// more than `threshold` on one genotype. Returns the last profile and the
/// convergence step, if reached within `max_steps`.
pub fn independent_pw_until_converged(
    g: &GameMatrix,
    x0: &MarginalProfile,
    max_steps: usize,
    threshold: f64,
) -> Result<(MarginalProfile, Option<usize>)> {
    check_profile(g.shape(), x0)?;
    let peak = |m: &MarginalProfile| -> f64 {
        m.vectors()
            .iter()
            .map(|v| v.iter().copied().fold(0.0, f64::max))
            .product()
    };
    let mut x = x0.clone();
    for t in 0..=max_steps {
        if peak(&x) > threshold {
            return Ok((x, Some(t)));
        }
        if t < max_steps {
            x = independent_pw_step(g, &x)?;
        }
    }
    Ok((x, None))
}
