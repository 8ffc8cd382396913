//! Closed-loop controllers: anything that picks a sleep configuration at
//! every step and optionally learns from the observed transition.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::env::{SleepAction, SufficientState};
use crate::features::{PowerCache, StateFeatures};
use crate::rl::Transition;

/// Everything observed over one step.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    pub state: &'a SufficientState,
    pub features: &'a StateFeatures,
    pub action: &'a SleepAction,
    pub cost: f64,
    pub next_state: &'a SufficientState,
    pub next_features: &'a StateFeatures,
}

impl<'a> Step<'a> {
    pub fn transition(&self) -> Transition<'a> {
        Transition {
            features: self.features,
            action: self.action,
            cost: self.cost,
            next_features: self.next_features,
        }
    }
}

pub trait Controller {
    /// Action at the initial state.
    fn start(
        &mut self,
        state: &SufficientState,
        features: &StateFeatures,
        rng: &mut dyn RngCore,
    ) -> SleepAction;

    /// Learn from step `n` (0-based) and return the action for `step.next_state`.
    fn advance(&mut self, n: u64, step: &Step<'_>, rng: &mut dyn RngCore) -> SleepAction;

    /// Called when the mobility model used for features changes.
    fn refresh_model(&mut self, _cache: &PowerCache) {}

    fn theta(&self) -> Option<&[f64]> {
        None
    }

    fn policy_weights(&self) -> Option<&[f64]> {
        None
    }

    fn average_cost(&self) -> Option<f64> {
        None
    }
}

/// Every awake sensor draws a sleep time uniformly from `0..=max_sleep`.
#[derive(Debug, Clone)]
pub struct RandomController {
    max_sleep: usize,
}

impl RandomController {
    pub fn new(max_sleep: usize) -> Self {
        Self { max_sleep }
    }

    fn draw(&self, state: &SufficientState, rng: &mut dyn RngCore) -> SleepAction {
        SleepAction(
            state
                .residual
                .iter()
                .map(|&r| {
                    if r == 0 {
                        rng.gen_range(0..=self.max_sleep)
                    } else {
                        0
                    }
                })
                .collect::<Vec<_>>(),
        )
    }
}

impl Controller for RandomController {
    fn start(
        &mut self,
        state: &SufficientState,
        _: &StateFeatures,
        rng: &mut dyn RngCore,
    ) -> SleepAction {
        self.draw(state, rng)
    }

    fn advance(&mut self, _: u64, step: &Step<'_>, rng: &mut dyn RngCore) -> SleepAction {
        self.draw(step.next_state, rng)
    }
}

/// Never sleeps.
#[derive(Debug, Clone, Default)]
pub struct AllAwakeController;

impl Controller for AllAwakeController {
    fn start(
        &mut self,
        state: &SufficientState,
        _: &StateFeatures,
        _: &mut dyn RngCore,
    ) -> SleepAction {
        SleepAction::all_awake(state.cells())
    }

    fn advance(&mut self, _: u64, step: &Step<'_>, _: &mut dyn RngCore) -> SleepAction {
        SleepAction::all_awake(step.next_state.cells())
    }
}
