use alloc::vec::Vec;

use rand::Rng;

use crate::env::SleepAction;
use crate::features::{AdmissibleSet, StateFeatures};

/// Per-sensor Boltzmann law `P(u) ∝ exp(weight * sigma(u))` over `set`.
///
/// Logits are shifted by their maximum before exponentiation.
pub fn boltzmann_probabilities(
    weight: f64,
    values: &[f64],
    set: AdmissibleSet,
) -> Vec<(usize, f64)> {
    let max = set
        .iter()
        .map(|u| weight * values[u])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<(usize, f64)> = set
        .iter()
        .map(|u| (u, libm::exp(weight * values[u] - max)))
        .collect();
    let total: f64 = probs.iter().map(|(_, p)| p).sum();
    probs.iter_mut().for_each(|(_, p)| *p /= total);
    probs
}

/// Sample every awake sensor's sleep time independently from its Boltzmann
/// law. Because `w^T sigma_{s,a}` is a sum of per-sensor terms, this is the
/// joint Boltzmann law over the product of admissible sets.
pub fn boltzmann_sample<R: Rng + ?Sized>(
    weights: &[f64],
    features: &StateFeatures,
    rng: &mut R,
) -> SleepAction {
    let n = features.cells();
    let mut action = Vec::with_capacity(n);
    for i in 0..n {
        if !features.is_awake(i) {
            action.push(0);
            continue;
        }
        let set = features.admissible(i);
        if set.len() == 1 {
            action.push(set.nth(0).unwrap_or(0));
            continue;
        }
        let probs = boltzmann_probabilities(weights[i], features.values(i), set);
        let target: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = probs[probs.len() - 1].0;
        for &(u, p) in &probs {
            acc += p;
            if target < acc {
                chosen = u;
                break;
            }
        }
        action.push(chosen);
    }
    SleepAction(action)
}

/// Uniform draw from the product of admissible sets.
pub fn uniform_admissible<R: Rng + ?Sized>(features: &StateFeatures, rng: &mut R) -> SleepAction {
    SleepAction(
        (0..features.cells())
            .map(|i| {
                if !features.is_awake(i) {
                    return 0;
                }
                let set = features.admissible(i);
                match set.len() {
                    1 => set.nth(0).unwrap_or(0),
                    k => set.nth(rng.gen_range(0..k)).unwrap_or(0),
                }
            })
            .collect(),
    )
}

/// Greedy minimiser of `theta^T sigma` with probability `1 - epsilon`,
/// otherwise a uniform admissible action.
pub fn epsilon_greedy_action<R: Rng + ?Sized>(
    theta: &[f64],
    features: &StateFeatures,
    epsilon: f64,
    rng: &mut R,
) -> SleepAction {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        uniform_admissible(features, rng)
    } else {
        features.greedy(theta)
    }
}
