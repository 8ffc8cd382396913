use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::env::{sample_index, ROW_SUM_TOLERANCE};
use crate::rl::schedule::StepSchedule;
use crate::{Error, Result};

/// Finite MDP with per-state action sets, used for checking learners
/// against exactly solvable models.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    costs: Vec<Vec<f64>>,
    transitions: Vec<Vec<Vec<f64>>>,
    reference: usize,
}

impl TabularMdp {
    /// `costs[x][a]`, `transitions[x][a][y]`; `reference` is the state whose
    /// minimal Q-value serves as the average-cost estimate.
    pub fn new(
        costs: Vec<Vec<f64>>,
        transitions: Vec<Vec<Vec<f64>>>,
        reference: usize,
    ) -> Result<Self> {
        let states = costs.len();
        if states == 0 || transitions.len() != states {
            return Err(Error::DimensionMismatch {
                expected: states,
                found: transitions.len(),
            });
        }
        if reference >= states {
            return Err(Error::InvalidCell {
                index: reference,
                cells: states,
            });
        }
        for (x, (c, rows)) in costs.iter().zip(&transitions).enumerate() {
            if c.is_empty() || c.len() != rows.len() {
                return Err(Error::DimensionMismatch {
                    expected: c.len(),
                    found: rows.len(),
                });
            }
            for row in rows {
                if row.len() != states {
                    return Err(Error::DimensionMismatch {
                        expected: states,
                        found: row.len(),
                    });
                }
                let sum: f64 = row.iter().sum();
                let min = row.iter().copied().fold(f64::INFINITY, f64::min);
                if min < 0.0 || libm::fabs(sum - 1.0) > ROW_SUM_TOLERANCE {
                    return Err(Error::NotStochastic { row: x, sum, min });
                }
            }
        }
        Ok(Self {
            costs,
            transitions,
            reference,
        })
    }

    pub fn states(&self) -> usize {
        self.costs.len()
    }

    pub fn actions(&self, state: usize) -> usize {
        self.costs[state].len()
    }

    pub fn cost(&self, state: usize, action: usize) -> f64 {
        self.costs[state][action]
    }

    pub fn transition(&self, state: usize, action: usize) -> &[f64] {
        &self.transitions[state][action]
    }

    pub fn reference(&self) -> usize {
        self.reference
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RqviOutcome {
    pub q: Vec<Vec<f64>>,
    /// `min_r Q(s_ref, r)`, the average-cost estimate.
    pub average_cost: f64,
}

impl RqviOutcome {
    /// `argmin_a Q(x, a)` per state, ties to the smaller action.
    pub fn greedy_policy(&self) -> Vec<usize> {
        self.q.iter().map(|row| argmin(row)).collect()
    }
}

fn argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in row.iter().enumerate() {
        if v < row[best] {
            best = a;
        }
    }
    best
}

fn min(row: &[f64]) -> f64 {
    row.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Synchronous stochastic relative Q-value iteration:
///
/// ```text
/// Q(x,a) <- Q(x,a) + a(n) (g(x,a) + min_b Q(y,b) - min_r Q(s_ref,r) - Q(x,a))
/// ```
///
/// with `y` drawn from `p(x, a, .)` for every pair at every iteration.
pub fn rqvi_full_state<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    schedule: &StepSchedule,
    iterations: u64,
    rng: &mut R,
) -> RqviOutcome {
    let mut q: Vec<Vec<f64>> = (0..mdp.states())
        .map(|x| vec![0.0; mdp.actions(x)])
        .collect();
    let mut minima = vec![0.0; mdp.states()];
    for n in 1..=iterations {
        for (m, row) in minima.iter_mut().zip(&q) {
            *m = min(row);
        }
        let reference = minima[mdp.reference()];
        let step = schedule.at(n);
        for (x, row) in q.iter_mut().enumerate() {
            for (a, value) in row.iter_mut().enumerate() {
                let y = sample_index(mdp.transition(x, a), rng);
                *value += step * (mdp.cost(x, a) + minima[y] - reference - *value);
            }
        }
    }
    let average_cost = min(&q[mdp.reference()]);
    RqviOutcome { q, average_cost }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_state_single_action() {
        let mdp = TabularMdp::new(vec![vec![0.3]], vec![vec![vec![1.0]]], 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = rqvi_full_state(&mdp, &StepSchedule::power(0.7).unwrap(), 20_000, &mut rng);
        assert!(
            (out.average_cost - 0.3).abs() < 1e-3,
            "{}",
            out.average_cost
        );
    }

    #[test]
    fn deterministic_cycle() {
        let mdp = TabularMdp::new(
            vec![vec![0.0], vec![1.0]],
            vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
            0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = rqvi_full_state(&mdp, &StepSchedule::power(0.7).unwrap(), 50_000, &mut rng);
        assert!(
            (out.average_cost - 0.5).abs() < 1e-2,
            "{}",
            out.average_cost
        );
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            TabularMdp::new(vec![vec![0.0]], vec![vec![vec![0.5]]], 0),
            Err(Error::NotStochastic { .. })
        ));
        assert!(TabularMdp::new(vec![vec![0.0]], vec![vec![vec![1.0]]], 1).is_err());
    }
}
