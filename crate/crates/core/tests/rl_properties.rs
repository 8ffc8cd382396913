#[path = "support/oracle.rs"]
mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sleepwake_core::env::{SleepAction, SufficientState};
use sleepwake_core::features::{FeatureParams, StateFeatures};
use sleepwake_core::rl::{
    average_cost_update, boltzmann_probabilities, boltzmann_sample, hadamard_perturbation,
    on_policy_td_update, qsa_a_update, qsa_d_update, spsa_policy_update, tqsa_a_update,
    tqsa_d_update, BoundedVector, BoxBounds, PerturbationSequence, SpsaScale, StepSchedule,
    TqsaSteps, Transition,
};

fn random_features<R: Rng>(cells: usize, params: &FeatureParams, rng: &mut R) -> StateFeatures {
    let width = params.max_sleep + 1;
    let mut state = SufficientState::initial(cells);
    for r in state.residual.iter_mut() {
        *r = if rng.gen_bool(0.5) {
            0
        } else {
            rng.gen_range(1..=params.max_sleep)
        };
    }
    let deltas: Vec<f64> = (0..cells * width)
        .map(|_| rng.gen_range(-0.3..0.3))
        .collect();
    StateFeatures::from_deltas(&state, &deltas, params)
}

fn random_action<R: Rng>(features: &StateFeatures, rng: &mut R) -> SleepAction {
    SleepAction(
        (0..features.cells())
            .map(|i| {
                let set = features.admissible(i);
                if features.is_awake(i) {
                    set.nth(rng.gen_range(0..set.len())).unwrap()
                } else {
                    0
                }
            })
            .collect(),
    )
}

/// The SPSA direction averaged over a Hadamard cycle recovers the gradient
/// of an affine map.
fn spsa_cycle_gradient(dim: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = rng.gen_range(0.5..5.0);
    let beta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w0: Vec<f64> = (0..dim).map(|_| rng.gen_range(10.0..90.0)).collect();
    let delta = 1e-3;
    let value = |w: &[f64]| {
        q * (1.0
            + beta
                .iter()
                .zip(w)
                .zip(&w0)
                .map(|((b, x), y)| b * (x - y))
                .sum::<f64>())
    };
    let seq = PerturbationSequence::new(dim);
    let unbounded = BoxBounds::new(-1e12, 1e12).unwrap();
    let mut mean = vec![0.0; dim];
    for n in 0..seq.order() as u64 {
        let d = seq.at(n);
        let probe: Vec<f64> = w0.iter().zip(d).map(|(w, d)| w + delta * d).collect();
        let mut w = BoundedVector::new(w0.clone(), unbounded);
        spsa_policy_update(
            &mut w,
            value(&probe),
            d,
            SpsaScale::new(delta).unwrap(),
            1.0,
        );
        for (m, (a, b)) in mean.iter_mut().zip(w.values().iter().zip(&w0)) {
            *m += (a - b) / seq.order() as f64;
        }
    }
    let analytic = beta.iter().map(|b| -q * b).collect();
    (mean, analytic)
}

#[test]
fn spsa_cycle_average_matches_affine_gradient() {
    for (dim, seed) in [(3, 1), (7, 2), (121, 3)] {
        let (estimate, analytic) = spsa_cycle_gradient(dim, seed);
        for (e, a) in estimate.iter().zip(&analytic) {
            assert!(
                (e - a).abs() <= 1e-2 * a.abs().max(1e-2),
                "dim {dim}: {e} vs {a}"
            );
        }
    }
}

#[test]
fn perturbation_matches_free_function() {
    let seq = PerturbationSequence::new(5);
    for n in 0..20 {
        assert_eq!(seq.at(n), hadamard_perturbation(n, 5).as_slice());
    }
}

#[test]
fn boltzmann_factorises_over_product_sets() {
    // Two awake sensors with two admissible sleep times each.
    let params = FeatureParams {
        xi: 0.1,
        ..Default::default()
    };
    let state = SufficientState::initial(2);
    let deltas = [1.0, 0.05, -0.08, -0.5, 1.0, 0.4, 0.09, 0.02];
    let features = StateFeatures::from_deltas(&state, &deltas, &params);
    let sets: Vec<Vec<usize>> = (0..2)
        .map(|i| features.admissible(i).iter().collect())
        .collect();
    assert_eq!(sets, vec![vec![1, 2], vec![2, 3]]);
    let w = [3.7, 42.0];
    // Joint law over the product set from the summed logits.
    let mut joint = Vec::new();
    for &u0 in &sets[0] {
        for &u1 in &sets[1] {
            joint.push((
                (u0, u1),
                (w[0] * features.value(0, u0) + w[1] * features.value(1, u1)).exp(),
            ));
        }
    }
    let z: f64 = joint.iter().map(|(_, v)| v).sum();
    let p0 = boltzmann_probabilities(w[0], features.values(0), features.admissible(0));
    let p1 = boltzmann_probabilities(w[1], features.values(1), features.admissible(1));
    let mut tv = 0.0;
    for ((u0, u1), v) in &joint {
        let a = p0.iter().find(|(u, _)| u == u0).unwrap().1;
        let b = p1.iter().find(|(u, _)| u == u1).unwrap().1;
        tv += (v / z - a * b).abs();
    }
    assert!(tv / 2.0 < 1e-12, "total variation {tv}");

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let draws = 100_000;
    let hits = (0..draws)
        .filter(|_| boltzmann_sample(&w, &features, &mut rng).0 == vec![2, 3])
        .count();
    let exact = joint.iter().find(|(k, _)| *k == (2, 3)).unwrap().1 / z;
    assert!((hits as f64 / draws as f64 - exact).abs() < 0.01);
}

#[test]
fn every_update_stays_in_its_box() {
    let params = FeatureParams::default();
    let bounds = BoxBounds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cells = 6;
    let mut theta = BoundedVector::at_lower_corner(cells, bounds);
    let mut theta_d = theta.clone();
    let mut theta_t = theta.clone();
    let mut theta_td = theta.clone();
    let mut w = BoundedVector::at_lower_corner(cells, bounds);
    let mut w_d = w.clone();
    let mut j_hat = 0.0;
    let seq = PerturbationSequence::new(cells);
    let reference = random_features(cells, &params, &mut rng);
    let scale = SpsaScale::default();
    for n in 1..=10_000u64 {
        let f = random_features(cells, &params, &mut rng);
        let g = random_features(cells, &params, &mut rng);
        let a = random_action(&f, &mut rng);
        let b = random_action(&g, &mut rng);
        let t = Transition {
            features: &f,
            action: &a,
            cost: rng.gen_range(0.0..cells as f64 * 0.1 + 1.0),
            next_features: &g,
        };
        let steps = TqsaSteps {
            policy: 1.0 / (n as f64).powf(0.55),
            critic: 1.0 / n as f64,
            average: 1.0 / (n as f64).powf(0.55),
        };
        qsa_a_update(&mut theta, &t, &reference, steps.critic);
        qsa_d_update(&mut theta_d, &t, 0.9, steps.critic);
        j_hat = tqsa_a_update(&mut theta_t, &mut w, j_hat, &t, &b, seq.at(n), steps, scale);
        tqsa_d_update(
            &mut theta_td,
            &mut w_d,
            &t,
            &b,
            seq.at(n),
            0.9,
            steps,
            scale,
        );
        for v in [&theta, &theta_d, &theta_t, &theta_td, &w, &w_d] {
            assert!(bounds.contains(v.values()), "step {n}: {:?}", v.values());
        }
    }
}

#[test]
fn on_policy_td_iterates_are_cauchy() {
    let params = FeatureParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let cells = 4;
    let pool: Vec<StateFeatures> = (0..5)
        .map(|_| {
            let state = SufficientState::initial(cells);
            let deltas: Vec<f64> = (0..cells * (params.max_sleep + 1))
                .map(|_| rng.gen_range(-0.1..0.1))
                .collect();
            StateFeatures::from_deltas(&state, &deltas, &params)
        })
        .collect();
    let w = vec![5.0; cells];
    let mut theta = BoundedVector::at_lower_corner(cells, BoxBounds::default());
    let schedule = StepSchedule::harmonic();
    let mut idx = 0;
    let mut action = boltzmann_sample(&w, &pool[idx], &mut rng);
    let mut tail = 0.0f64;
    let total = 20_000u64;
    for n in 1..=total {
        let next = rng.gen_range(0..pool.len());
        let next_action = boltzmann_sample(&w, &pool[next], &mut rng);
        let sigma = pool[idx].vector(&action);
        let next_q = pool[next].dot(theta.values(), &next_action);
        let before = theta.values().to_vec();
        on_policy_td_update(
            &mut theta,
            &sigma,
            rng.gen_range(0.0..1.4),
            0.7,
            next_q,
            schedule.at(n),
        );
        if n > total - 100 {
            let change = before
                .iter()
                .zip(theta.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            tail = tail.max(change);
        }
        idx = next;
        action = next_action;
    }
    assert!(tail < 1e-3, "tail step {tail}");
}

#[test]
fn average_cost_tracks_frozen_policy() {
    // Three-state chain under a frozen policy.
    let rows = vec![
        vec![0.5, 0.3, 0.2],
        vec![0.1, 0.6, 0.3],
        vec![0.4, 0.4, 0.2],
    ];
    let costs = [0.2, 1.1, 0.6];
    let pi = oracle::stationary(&rows);
    let exact: f64 = pi.iter().zip(&costs).map(|(p, c)| p * c).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut x = 0;
    let mut j_hat = 0.0;
    let schedule = StepSchedule::harmonic();
    for n in 1..=200_000u64 {
        j_hat = average_cost_update(j_hat, costs[x], schedule.at(n));
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        for (y, w) in rows[x].iter().enumerate() {
            acc += w;
            if r < acc {
                x = y;
                break;
            }
        }
    }
    assert!((j_hat - exact).abs() < 1e-2, "{j_hat} vs {exact}");
}
