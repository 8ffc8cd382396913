//! One-step parameter updates of the four learners.
//!
//! All minimisations over joint actions are evaluated per sensor through
//! [`StateFeatures::min_dot`], which relies on `theta > 0` (guaranteed by
//! the default `[1, 100]` box).

use crate::env::SleepAction;
use crate::features::StateFeatures;
use crate::rl::projection::{PolicyParams, QParams};
use crate::{Error, Result};

/// One observed step `(s, a, g, s')`.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub features: &'a StateFeatures,
    pub action: &'a SleepAction,
    pub cost: f64,
    pub next_features: &'a StateFeatures,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Average,
    Discounted(f64),
}

impl Objective {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Objective::Discounted(g) if !(g > 0.0 && g < 1.0) => {
                Err(Error::InvalidConfig("discount factor must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }
}

/// SPSA perturbation size `delta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpsaScale(f64);

impl SpsaScale {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidConfig(
                "SPSA perturbation size must be positive",
            ));
        }
        Ok(Self(delta))
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

impl Default for SpsaScale {
    fn default() -> Self {
        Self(1e-3)
    }
}

/// Average-cost Q-learning:
/// `theta += a(n) sigma (g + min_v theta^T sigma' - min_r theta^T sigma_ref - theta^T sigma)`.
pub fn qsa_a_update(theta: &mut QParams, t: &Transition<'_>, reference: &StateFeatures, step: f64) {
    let sigma = t.features.vector(t.action);
    let current = crate::linalg::dot(theta.values(), &sigma);
    let next_min = t.next_features.min_dot(theta.values());
    let reference_min = reference.min_dot(theta.values());
    let td = t.cost + next_min - reference_min - current;
    theta.step(&sigma, step * td);
}

/// Discounted Q-learning:
/// `theta += a(n) sigma (g + gamma min_b theta^T sigma' - theta^T sigma)`.
pub fn qsa_d_update(theta: &mut QParams, t: &Transition<'_>, gamma: f64, step: f64) {
    let sigma = t.features.vector(t.action);
    let current = crate::linalg::dot(theta.values(), &sigma);
    let next_min = t.next_features.min_dot(theta.values());
    let td = t.cost + gamma * next_min - current;
    theta.step(&sigma, step * td);
}

/// `J <- J + c(n) (g - J)`.
pub fn average_cost_update(j_hat: f64, cost: f64, step: f64) -> f64 {
    j_hat + step * (cost - j_hat)
}

/// One-measurement SPSA descent on the policy weights:
/// `w <- project(w - a(n) (theta^T sigma / delta) Delta^{-1})`.
pub fn spsa_policy_update(
    w: &mut PolicyParams,
    q_value: f64,
    perturbation: &[f64],
    scale: SpsaScale,
    step: f64,
) {
    let inverse: alloc::vec::Vec<f64> = perturbation.iter().map(|d| 1.0 / d).collect();
    w.step(&inverse, -step * q_value / scale.get());
}

/// On-policy TD step `theta += b(n) sigma (g - baseline + next_q - q)`, where
/// `baseline` is the average-cost estimate (zero when discounted) and
/// `next_q` already carries the discount.
pub fn on_policy_td_update(
    theta: &mut QParams,
    sigma: &[f64],
    cost: f64,
    baseline: f64,
    next_q: f64,
    step: f64,
) {
    let current = crate::linalg::dot(theta.values(), sigma);
    let td = cost - baseline + next_q - current;
    theta.step(sigma, step * td);
}

/// Step sizes for one two-timescale iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TqsaSteps {
    /// Fast policy step `a(n)`.
    pub policy: f64,
    /// Slow critic step `b(n)`.
    pub critic: f64,
    /// Average-cost step `c(n)`.
    pub average: f64,
}

/// Average-cost two-timescale update. `next_action` was sampled at `s'`
/// from the perturbed policy. Returns the new average-cost estimate.
#[allow(clippy::too_many_arguments)]
pub fn tqsa_a_update(
    theta: &mut QParams,
    w: &mut PolicyParams,
    j_hat: f64,
    t: &Transition<'_>,
    next_action: &SleepAction,
    perturbation: &[f64],
    steps: TqsaSteps,
    scale: SpsaScale,
) -> f64 {
    let sigma = t.features.vector(t.action);
    let current = crate::linalg::dot(theta.values(), &sigma);
    let next_q = t.next_features.dot(theta.values(), next_action);
    let j_next = average_cost_update(j_hat, t.cost, steps.average);
    spsa_policy_update(w, current, perturbation, scale, steps.policy);
    on_policy_td_update(theta, &sigma, t.cost, j_next, next_q, steps.critic);
    j_next
}

/// Discounted two-timescale update; no average-cost recursion.
#[allow(clippy::too_many_arguments)]
pub fn tqsa_d_update(
    theta: &mut QParams,
    w: &mut PolicyParams,
    t: &Transition<'_>,
    next_action: &SleepAction,
    perturbation: &[f64],
    gamma: f64,
    steps: TqsaSteps,
    scale: SpsaScale,
) {
    let sigma = t.features.vector(t.action);
    let current = crate::linalg::dot(theta.values(), &sigma);
    let next_q = gamma * t.next_features.dot(theta.values(), next_action);
    spsa_policy_update(w, current, perturbation, scale, steps.policy);
    on_policy_td_update(theta, &sigma, t.cost, 0.0, next_q, steps.critic);
}
