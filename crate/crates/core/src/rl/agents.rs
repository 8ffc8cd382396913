use alloc::vec::Vec;

use rand::RngCore;

use crate::control::{Controller, Step};
use crate::env::{SleepAction, SufficientState};
use crate::features::{PowerCache, StateFeatures};
use crate::linalg;
use crate::rl::hadamard::PerturbationSequence;
use crate::rl::policy::{boltzmann_sample, epsilon_greedy_action};
use crate::rl::projection::{PolicyParams, QParams};
use crate::rl::schedule::StepSchedule;
use crate::rl::updates::{
    average_cost_update, on_policy_td_update, qsa_a_update, qsa_d_update, spsa_policy_update,
    Objective, SpsaScale,
};
use crate::{Error, Result};

/// Epsilon-greedy Q-learning with linear features (average cost or discounted).
#[derive(Debug, Clone)]
pub struct QsaLearner {
    objective: Objective,
    theta: QParams,
    epsilon: f64,
    schedule: StepSchedule,
    /// Fixed state whose minimal Q-value is subtracted in the average-cost update.
    reference: Option<(SufficientState, StateFeatures)>,
}

impl QsaLearner {
    /// Average-cost variant; `reference` is the fixed comparison state.
    pub fn average(
        theta: QParams,
        epsilon: f64,
        schedule: StepSchedule,
        reference: SufficientState,
        cache: &PowerCache,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        let features = cache.state_features(&reference);
        Ok(Self {
            objective: Objective::Average,
            theta,
            epsilon,
            schedule,
            reference: Some((reference, features)),
        })
    }

    pub fn discounted(
        theta: QParams,
        epsilon: f64,
        schedule: StepSchedule,
        gamma: f64,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        let objective = Objective::Discounted(gamma);
        objective.validate()?;
        Ok(Self {
            objective,
            theta,
            epsilon,
            schedule,
            reference: None,
        })
    }

    pub fn params(&self) -> &QParams {
        &self.theta
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidConfig("epsilon must lie in [0, 1]"))
    }
}

impl Controller for QsaLearner {
    fn start(
        &mut self,
        _: &SufficientState,
        features: &StateFeatures,
        rng: &mut dyn RngCore,
    ) -> SleepAction {
        epsilon_greedy_action(self.theta.values(), features, self.epsilon, rng)
    }

    fn advance(&mut self, n: u64, step: &Step<'_>, rng: &mut dyn RngCore) -> SleepAction {
        let t = step.transition();
        let a = self.schedule.at(n + 1);
        match (self.objective, &self.reference) {
            (Objective::Average, Some((_, reference))) => {
                qsa_a_update(&mut self.theta, &t, reference, a)
            }
            (Objective::Discounted(gamma), _) => qsa_d_update(&mut self.theta, &t, gamma, a),
            (Objective::Average, None) => {
                unreachable!("average-cost learner is built with a reference state")
            }
        }
        epsilon_greedy_action(self.theta.values(), step.next_features, self.epsilon, rng)
    }

    fn refresh_model(&mut self, cache: &PowerCache) {
        if let Some((state, features)) = &mut self.reference {
            *features = cache.state_features(state);
        }
    }

    fn theta(&self) -> Option<&[f64]> {
        Some(self.theta.values())
    }
}

/// Step-size schedules of the two-timescale learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TqsaSchedules {
    /// Fast schedule `a(n)` for the policy weights.
    pub policy: StepSchedule,
    /// Slow schedule `b(n)` for the Q-value weights.
    pub critic: StepSchedule,
    /// `c(n) = k a(n)` for the average-cost estimate.
    pub average: StepSchedule,
}

impl TqsaSchedules {
    pub fn new(policy: StepSchedule, critic: StepSchedule, average_scale: f64) -> Result<Self> {
        if !critic.is_slower_than(&policy) {
            return Err(Error::InvalidSchedule(
                "critic schedule must decay faster than the policy schedule",
            ));
        }
        Ok(Self {
            policy,
            critic,
            average: policy.scaled(average_scale)?,
        })
    }
}

impl Default for TqsaSchedules {
    fn default() -> Self {
        let policy = StepSchedule::power(0.55).expect("valid exponent");
        Self {
            policy,
            critic: StepSchedule::harmonic(),
            average: policy,
        }
    }
}

/// Two-timescale on-policy Q-learning with a Boltzmann policy whose weights
/// follow a one-measurement SPSA gradient estimate.
///
/// Per step: sample `a_n` from `pi_{w_n + delta Delta_n}`; after observing
/// `(g_n, s_{n+1})` update `w` on the fast timescale, sample `a_{n+1}` from
/// `pi_{w_{n+1} + delta Delta_{n+1}}`, then update the average-cost estimate
/// and `theta` on the slow timescale using `a_{n+1}`'s features.
#[derive(Debug, Clone)]
pub struct TqsaLearner {
    objective: Objective,
    theta: QParams,
    w: PolicyParams,
    j_hat: f64,
    perturbations: PerturbationSequence,
    schedules: TqsaSchedules,
    scale: SpsaScale,
    perturbed: Vec<f64>,
}

impl TqsaLearner {
    pub fn new(
        objective: Objective,
        theta: QParams,
        w: PolicyParams,
        schedules: TqsaSchedules,
        scale: SpsaScale,
    ) -> Result<Self> {
        objective.validate()?;
        if theta.len() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: theta.len(),
                found: w.len(),
            });
        }
        let dim = w.len();
        Ok(Self {
            objective,
            theta,
            w,
            j_hat: 0.0,
            perturbations: PerturbationSequence::new(dim),
            schedules,
            scale,
            perturbed: Vec::with_capacity(dim),
        })
    }

    pub fn with_initial_average_cost(mut self, j_hat: f64) -> Self {
        self.j_hat = j_hat;
        self
    }

    fn sample(&mut self, n: u64, features: &StateFeatures, rng: &mut dyn RngCore) -> SleepAction {
        let delta = self.perturbations.at(n);
        self.perturbed.clear();
        self.perturbed.extend(
            self.w
                .values()
                .iter()
                .zip(delta)
                .map(|(w, d)| w + self.scale.get() * d),
        );
        boltzmann_sample(&self.perturbed, features, rng)
    }
}

impl Controller for TqsaLearner {
    fn start(
        &mut self,
        _: &SufficientState,
        features: &StateFeatures,
        rng: &mut dyn RngCore,
    ) -> SleepAction {
        self.sample(0, features, rng)
    }

    fn advance(&mut self, n: u64, step: &Step<'_>, rng: &mut dyn RngCore) -> SleepAction {
        let m = n + 1;
        let sigma = step.features.vector(step.action);
        let q = linalg::dot(self.theta.values(), &sigma);

        spsa_policy_update(
            &mut self.w,
            q,
            self.perturbations.at(n),
            self.scale,
            self.schedules.policy.at(m),
        );
        let next_action = self.sample(m, step.next_features, rng);
        let next_q = step.next_features.dot(self.theta.values(), &next_action);

        let critic = self.schedules.critic.at(m);
        match self.objective {
            Objective::Average => {
                self.j_hat =
                    average_cost_update(self.j_hat, step.cost, self.schedules.average.at(m));
                on_policy_td_update(
                    &mut self.theta,
                    &sigma,
                    step.cost,
                    self.j_hat,
                    next_q,
                    critic,
                );
            }
            Objective::Discounted(gamma) => {
                on_policy_td_update(
                    &mut self.theta,
                    &sigma,
                    step.cost,
                    0.0,
                    gamma * next_q,
                    critic,
                );
            }
        }
        next_action
    }

    fn theta(&self) -> Option<&[f64]> {
        Some(self.theta.values())
    }

    fn policy_weights(&self) -> Option<&[f64]> {
        Some(self.w.values())
    }

    fn average_cost(&self) -> Option<f64> {
        match self.objective {
            Objective::Average => Some(self.j_hat),
            Objective::Discounted(_) => None,
        }
    }
}
