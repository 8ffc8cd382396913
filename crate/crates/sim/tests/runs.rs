use std::fs;

use sleepwake_core::env::{GridSpec, TransitionModel};
use sleepwake_sim::harness::{run_with_model, write_outputs};
use sleepwake_sim::metrics::{read_series, read_summary};
use sleepwake_sim::{Algorithm, RunConfig};

fn small(algorithm: Algorithm, seed: u64) -> RunConfig {
    RunConfig {
        rows: 3,
        cols: 3,
        cycles: 6000,
        algorithm,
        seed,
        ..RunConfig::default()
    }
}

fn walk(rows: usize, cols: usize) -> TransitionModel {
    TransitionModel::lazy_random_walk(&GridSpec::new(rows, cols).unwrap())
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let truth = walk(3, 3);
    for algorithm in [Algorithm::TqsaA, Algorithm::QsaD, Algorithm::Qmdp] {
        let cfg = RunConfig {
            cycles: 500,
            ..small(algorithm, 3)
        };
        let mut bytes = Vec::new();
        for sub in ["a", "b"] {
            let (series, summary) = run_with_model(&cfg, &truth).unwrap();
            let (path, _) = write_outputs(&dir.path().join(sub), &cfg, &series, &summary).unwrap();
            bytes.push(fs::read(path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{algorithm}");
    }
}

#[test]
fn summary_recomputes_from_series_file() {
    let dir = tempfile::tempdir().unwrap();
    let truth = walk(4, 3);
    let cfg = RunConfig {
        rows: 4,
        cols: 3,
        cycles: 1500,
        ..small(Algorithm::TqsaA, 8)
    };
    let (series, summary) = run_with_model(&cfg, &truth).unwrap();
    let (series_path, summary_path) = write_outputs(dir.path(), &cfg, &series, &summary).unwrap();

    let text = fs::read_to_string(series_path).unwrap();
    let mut detects = 0.0;
    let mut awake = 0.0;
    let mut cost = 0.0;
    let mut rows = 0.0;
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        detects += f[1].parse::<f64>().unwrap();
        awake += f[2].parse::<f64>().unwrap();
        cost += f[3].parse::<f64>().unwrap();
        rows += 1.0;
    }
    let back = read_summary(&summary_path).unwrap();
    assert_eq!(rows, 1500.0);
    assert!((back.detects_per_step - detects / rows).abs() < 1e-12);
    assert!((back.awake_per_step - awake / rows).abs() < 1e-12);
    assert!((back.mean_cost - cost / rows).abs() < 1e-9);
    assert_eq!(
        read_series(&dir.path().join("tqsa-a-4x3-s8.csv")).unwrap(),
        series
    );
}

/// A sensor under the random policy is awake for one step and then sleeps
/// `u ~ U{0..3}` steps, independently of the intruder, so a renewal argument
/// gives a detection rate of `1 / (1 + E[u]) = 0.4`.
#[test]
fn random_policy_matches_renewal_rate() {
    let truth = walk(3, 3);
    let detects: Vec<f64> = (0..10)
        .map(|seed| {
            run_with_model(&small(Algorithm::Random, seed), &truth)
                .unwrap()
                .1
                .detects_per_step
        })
        .collect();
    let mean = detects.iter().sum::<f64>() / 10.0;
    let sd = (detects.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
    // Binomial spread of one run, a floor for the sample estimate.
    let per_run = (0.4f64 * 0.6 / 6000.0).sqrt();
    let tolerance = 3.0 * sd.max(per_run) / 10f64.sqrt();
    assert!(
        (mean - 0.4).abs() < tolerance,
        "mean {mean}, tolerance {tolerance}"
    );
}

#[test]
fn all_awake_always_detects() {
    let truth = walk(3, 3);
    let (series, summary) = run_with_model(
        &RunConfig {
            cycles: 300,
            ..small(Algorithm::AllAwake, 1)
        },
        &truth,
    )
    .unwrap();
    assert_eq!(summary.detects_per_step, 1.0);
    assert_eq!(summary.awake_per_step, 9.0);
    // c * 9 sensors, no miss.
    assert!(series
        .records()
        .iter()
        .all(|r| (r.cost - 0.9).abs() < 1e-12));
}

#[test]
fn estimated_model_reports_error() {
    let truth = walk(3, 3);
    let cfg = RunConfig {
        cycles: 400,
        estimate_p: true,
        ..small(Algorithm::QsaA, 2)
    };
    let (series, summary) = run_with_model(&cfg, &truth).unwrap();
    assert!(series
        .records()
        .iter()
        .all(|r| r.p_err.is_some_and(|e| (0.0..=1.0).contains(&e))));
    assert_eq!(summary.final_p_err, series.records().last().unwrap().p_err);
}
