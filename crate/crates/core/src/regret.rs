//! External-regret accounting for one locus along a population trajectory,
//! and the `AF ≥ AF_i − s² − ln(n)/T` bound that PW guarantees for it.
//!
//! Round `t` of the repeated game is generation `t` of the trajectory, so a
//! trajectory `P^0..P^T` yields `T` rounds played at `P^0..P^{T-1}`.

use serde::Serialize;

use crate::distribution::JointDistribution;
use crate::error::{Error, Result};
use crate::landscape::FitnessLandscape;
use crate::learners::{alpha_utilities, conditional_utilities};

/// Slack below zero tolerated before the bound is reported violated.
pub const BOUND_SLACK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", content = "r", rename_all = "lowercase")]
pub enum RegretMode {
    /// Payoffs `g̲^t_i`, realized `w̄^t`.
    Sr,
    /// Payoffs `g^{t,(r)}_i`, realized `Σ_i x^t_i g^{t,(r)}_i`.
    Rs(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    pub player: usize,
    pub mode: RegretMode,
    /// Per-round payoff of every action, `[t][i]`.
    pub utilities: Vec<Vec<f64>>,
    /// Per-round realized payoff.
    pub realized: Vec<f64>,
    /// Selection strength of the landscape.
    pub selection_strength: f64,
    pub actions: usize,
}

impl RegretLedger {
    pub fn horizon(&self) -> usize {
        self.realized.len()
    }

    /// `AF^T_i` for every action.
    pub fn action_averages(&self) -> Vec<f64> {
        let t = self.horizon() as f64;
        (0..self.actions)
            .map(|i| self.utilities.iter().map(|u| u[i]).sum::<f64>() / t)
            .collect()
    }

    /// Realized `AF^T`.
    pub fn realized_average(&self) -> f64 {
        self.realized.iter().sum::<f64>() / self.horizon() as f64
    }

    /// Prefix sums `max_i Σ_{t<T'} (u^t_i − realized^t)` for `T' = 1..=T`.
    pub fn cumulative_regret(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.actions];
        self.utilities
            .iter()
            .zip(&self.realized)
            .map(|(u, &w)| {
                for (acc, ui) in totals.iter_mut().zip(u) {
                    *acc += ui - w;
                }
                totals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

fn rounds(states: &[JointDistribution]) -> Result<&[JointDistribution]> {
    if states.len() < 2 {
        return Err(Error::TrajectoryTooShort {
            needed: 2,
            found: states.len(),
        });
    }
    Ok(&states[..states.len() - 1])
}

pub fn build_ledger(
    w: &FitnessLandscape,
    states: &[JointDistribution],
    player: usize,
    mode: RegretMode,
) -> Result<RegretLedger> {
    w.shape().check_locus(player)?;
    let mut utilities = Vec::new();
    let mut realized = Vec::new();
    for p in rounds(states)? {
        match mode {
            RegretMode::Sr => {
                utilities.push(conditional_utilities(w, p, player)?);
                realized.push(w.average_fitness(p)?);
            }
            RegretMode::Rs(r) => {
                let g = alpha_utilities(w, p, player, r)?;
                let x = p.marginal(player)?;
                realized.push(x.iter().zip(&g).map(|(a, b)| a * b).sum());
                utilities.push(g);
            }
        }
    }
    Ok(RegretLedger {
        player,
        mode,
        utilities,
        realized,
        selection_strength: w.selection_strength(),
        actions: w.shape().n(player),
    })
}

/// Payoffs of the rescaled game `Δ = (W − 1)/s`, one row per state.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialQuantities {
    pub s: f64,
    /// `m^{(t)}_i = Σ_{i_{-j}} P^t(i_{-j} | i_j) Δ_{i_j, i_{-j}}`, `[t][i]`;
    /// zero for actions with zero frequency.
    pub m: Vec<Vec<f64>>,
    /// `⟨x^t, m^{(t)}⟩`.
    pub inner: Vec<f64>,
}

pub fn differential_quantities(
    w: &FitnessLandscape,
    states: &[JointDistribution],
    player: usize,
    s: f64,
) -> Result<DifferentialQuantities> {
    let required = w.selection_strength();
    if s.is_nan() || s <= 0.0 || s < required {
        return Err(Error::SelectionStrengthTooSmall { s, required });
    }
    let shape = w.shape();
    shape.check_locus(player)?;
    let delta: Vec<f64> = w.values().iter().map(|v| (v - 1.0) / s).collect();
    let mut m = Vec::with_capacity(states.len());
    let mut inner = Vec::with_capacity(states.len());
    for p in states {
        shape.ensure_same(p.shape())?;
        let mut mass = vec![0.0; shape.n(player)];
        let mut acc = vec![0.0; shape.n(player)];
        for (flat, (&pi, &d)) in p.probs().iter().zip(&delta).enumerate() {
            let a = shape.allele_at(flat, player);
            mass[a] += pi;
            acc[a] += pi * d;
        }
        let row: Vec<f64> = acc
            .iter()
            .zip(&mass)
            .map(|(&v, &x)| if x > 0.0 { v / x } else { 0.0 })
            .collect();
        inner.push(mass.iter().zip(&row).map(|(x, mi)| x * mi).sum());
        m.push(row);
    }
    Ok(DifferentialQuantities { s, m, inner })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub player: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub s: f64,
    pub n: usize,
    pub af_realized: f64,
    /// `max_i AF^T_i`.
    pub af_best_action: f64,
    /// `max_i (AF^T_i − s² − ln(n)/T)`.
    pub bound: f64,
    /// `af_realized − bound`, the smallest per-action slack.
    pub slack: f64,
    pub passed: bool,
    #[serde(skip)]
    pub action_averages: Vec<f64>,
    #[serde(skip)]
    pub action_slack: Vec<f64>,
    /// Set when `s` lies outside `(0, 1/2)`, where the bound is not
    /// guaranteed.
    #[serde(skip)]
    pub outside_guarantee: bool,
}

pub fn check_regret_bound(ledger: &RegretLedger, s: f64, n: usize) -> RegretReport {
    let horizon = ledger.horizon();
    let penalty = s * s + (n as f64).ln() / horizon as f64;
    let action_averages = ledger.action_averages();
    let af_realized = ledger.realized_average();
    let action_slack: Vec<f64> = action_averages.iter().map(|af| af_realized - (af - penalty)).collect();
    let af_best_action = action_averages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound = af_best_action - penalty;
    let slack = af_realized - bound;
    RegretReport {
        player: ledger.player,
        horizon,
        s,
        n,
        af_realized,
        af_best_action,
        bound,
        slack,
        passed: slack >= -BOUND_SLACK_TOLERANCE,
        action_averages,
        action_slack,
        outside_guarantee: !(s > 0.0 && s < 0.5),
    }
}
