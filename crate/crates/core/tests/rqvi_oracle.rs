#[path = "support/oracle.rs"]
mod oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sleepwake_core::rl::{rqvi_full_state, StepSchedule, TabularMdp};

fn check(mdp: &oracle::Mdp, seed: u64) {
    let exact = mdp.optimal_average();
    let tabular = TabularMdp::new(mdp.cost.clone(), mdp.trans.clone(), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = rqvi_full_state(&tabular, &StepSchedule::harmonic(), 100_000, &mut rng);
    assert!(
        (out.average_cost - exact).abs() < 1e-2,
        "seed {seed}: estimate {} vs optimum {exact}",
        out.average_cost
    );
}

#[test]
fn two_state_two_action_matches_enumeration() {
    let mdp = oracle::Mdp {
        cost: vec![vec![1.0, 0.4], vec![0.2, 0.9]],
        trans: vec![
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            vec![vec![0.7, 0.3], vec![0.5, 0.5]],
        ],
    };
    // Enumeration by hand: policy (1, 0) has stationary law (7/15, 8/15)
    // solving pi0 = 0.2 pi0 + 0.7 pi1.
    let by_hand = 7.0 / 15.0 * 0.4 + 8.0 / 15.0 * 0.2;
    assert!((mdp.policy_average(&[1, 0]) - by_hand).abs() < 1e-12);
    check(&mdp, 11);
}

#[test]
fn random_five_state_instances() {
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        check(&oracle::Mdp::random(5, 2, &mut rng), seed);
    }
}

#[test]
fn oracle_stationary_is_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mdp = oracle::Mdp::random(6, 1, &mut rng);
    let rows: Vec<Vec<f64>> = mdp.trans.iter().map(|r| r[0].clone()).collect();
    let pi = oracle::stationary(&rows);
    let again = oracle::propagate(&pi, &rows, 1);
    for (a, b) in pi.iter().zip(&again) {
        assert!((a - b).abs() < 1e-12);
    }
}
