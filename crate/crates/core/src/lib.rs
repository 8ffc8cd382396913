//! Sleep-wake scheduling for intrusion-tracking sensor networks.
//!
//! The crate models a field of `N` sensors laid out on a grid, an intruder
//! that moves according to a Markov chain, and the controller's sufficient
//! statistic `(belief, residual sleep times)`. On top of that model it
//! provides the feature construction, the average-cost and discounted
//! learners (one-timescale Q-learning and two-timescale on-policy
//! Q-learning with SPSA policy search), an online estimator for the
//! intruder's mobility matrix, and the FCR / Q_MDP comparison policies.
//!
//! Everything here is `no_std` + `alloc`. Randomness is always passed in
//! as an explicit [`rand::Rng`] handle; there is no global state.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod control;
pub mod env;
mod error;
pub mod features;
pub mod linalg;
pub mod mobility;
pub mod rl;

pub use error::{Error, Result};
