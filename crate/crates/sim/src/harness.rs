//! Closed-loop simulation driver.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sleepwake_core::baselines::{FcrController, QmdpController, QmdpSettings};
use sleepwake_core::control::{AllAwakeController, Controller, RandomController, Step};
use sleepwake_core::env::{
    env_step, initial_condition, GridSpec, Observation, SufficientState, TransitionModel,
};
use sleepwake_core::features::PowerCache;
use sleepwake_core::linalg;
use sleepwake_core::mobility::MobilityEstimate;
use sleepwake_core::rl::{
    BoundedVector, Objective, QsaLearner, SpsaScale, TqsaLearner, TqsaSchedules,
};

use crate::config::{Algorithm, RunConfig};
use crate::matrix_io::read_matrix;
use crate::metrics::{emit_csv, write_summary, MetricsSeries, RunSummary, StepRecord};
use crate::{Error, Result};

/// Independent random streams of one run, all derived from the run seed.
pub struct Streams {
    /// Intruder placement and motion.
    pub intruder: ChaCha8Rng,
    /// Epsilon-greedy exploration and the random baseline.
    pub exploration: ChaCha8Rng,
    /// Boltzmann policy sampling.
    pub policy: ChaCha8Rng,
    /// One-off draws at construction time.
    pub setup: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            intruder: stream(0),
            exploration: stream(1),
            policy: stream(2),
            setup: stream(3),
        }
    }
}

/// The configured matrix file, or the lazy random walk on the grid.
pub fn true_model(cfg: &RunConfig) -> Result<TransitionModel> {
    let grid = GridSpec::new(cfg.rows, cfg.cols)?;
    match &cfg.p_matrix {
        Some(path) => {
            let model = read_matrix(path)?;
            if model.cells() != grid.cells() {
                return Err(Error::Config(format!(
                    "{} describes {} cells but the grid has {}",
                    path.display(),
                    model.cells(),
                    grid.cells()
                )));
            }
            Ok(model)
        }
        None => Ok(TransitionModel::lazy_random_walk(&grid)),
    }
}

pub fn build_controller(
    cfg: &RunConfig,
    truth: &TransitionModel,
    cache: &PowerCache,
    setup: &mut ChaCha8Rng,
) -> Result<Box<dyn Controller>> {
    let n = cfg.cells();
    let bounds = cfg.bounds()?;
    let theta = BoundedVector::new(vec![cfg.theta0; n], bounds);
    let w = BoundedVector::new(vec![cfg.w0; n], bounds);
    let max_sleep = cfg.features.max_sleep;
    let tqsa_schedules = || -> Result<TqsaSchedules> {
        Ok(TqsaSchedules::new(
            cfg.policy_schedule()?,
            cfg.critic_schedule()?,
            cfg.k_avg,
        )?)
    };
    Ok(match cfg.algorithm {
        Algorithm::QsaA => {
            let mut reference = SufficientState::initial(n);
            for r in reference.residual.iter_mut() {
                *r = setup.gen_range(0..=max_sleep);
            }
            Box::new(QsaLearner::average(
                theta,
                cfg.epsilon,
                cfg.qsa_schedule()?,
                reference,
                cache,
            )?)
        }
        Algorithm::QsaD => Box::new(QsaLearner::discounted(
            theta,
            cfg.epsilon,
            cfg.qsa_schedule()?,
            cfg.gamma,
        )?),
        Algorithm::TqsaA => Box::new(
            TqsaLearner::new(
                Objective::Average,
                theta,
                w,
                tqsa_schedules()?,
                SpsaScale::new(cfg.delta_spsa)?,
            )?
            .with_initial_average_cost(cfg.j0),
        ),
        Algorithm::TqsaD => Box::new(TqsaLearner::new(
            Objective::Discounted(cfg.gamma),
            theta,
            w,
            tqsa_schedules()?,
            SpsaScale::new(cfg.delta_spsa)?,
        )?),
        Algorithm::Fcr => Box::new(FcrController::new(
            truth.clone(),
            cfg.energy,
            max_sleep,
            cfg.fcr_depth,
            cfg.convention(),
        )?),
        Algorithm::Qmdp => Box::new(QmdpController::new(
            truth.clone(),
            QmdpSettings {
                energy: cfg.energy,
                max_sleep,
                convention: cfg.convention(),
                tolerance: cfg.tol,
                max_sweeps: cfg.max_sweeps,
            },
        )?),
        Algorithm::Random => Box::new(RandomController::new(max_sleep)),
        Algorithm::AllAwake => Box::new(AllAwakeController),
    })
}

/// Runs `cfg.cycles` steps of the closed loop and returns the per-step
/// metrics with their summary. Deterministic in `(cfg.seed, cfg)` apart from
/// the summary's wall-clock field.
pub fn run_experiment(cfg: &RunConfig) -> Result<(MetricsSeries, RunSummary)> {
    run_with_model(cfg, &true_model(cfg)?)
}

pub fn run_with_model(
    cfg: &RunConfig,
    truth: &TransitionModel,
) -> Result<(MetricsSeries, RunSummary)> {
    cfg.validate()?;
    if truth.cells() != cfg.cells() {
        return Err(Error::Config(format!(
            "mobility model has {} cells but the grid has {}",
            truth.cells(),
            cfg.cells()
        )));
    }
    let started = Instant::now();
    let cost_params = cfg.cost()?;
    let mut streams = Streams::new(cfg.seed);
    let mut estimate = if cfg.estimate_p {
        Some(MobilityEstimate::uniform(
            cfg.cells(),
            cfg.mobility_schedule()?,
        ))
    } else {
        None
    };
    let mut belief_model = match &estimate {
        Some(e) => e.to_model()?,
        None => truth.clone(),
    };
    let mut cache = PowerCache::new(&belief_model, cfg.features)?;
    let mut controller = build_controller(cfg, truth, &cache, &mut streams.setup)?;
    let decision_rng = if cfg.algorithm.is_two_timescale() {
        &mut streams.policy
    } else {
        &mut streams.exploration
    };

    let (mut state, mut hidden) = initial_condition(cfg.cells(), &mut streams.intruder);
    let mut features = cache.state_features(&state);
    let mut action = controller.start(&state, &features, decision_rng);

    let mut series = MetricsSeries::with_capacity(cfg.cycles as usize);
    let tail_start = cfg.cycles.saturating_sub(cfg.drift_window);
    let mut tail_drift: Option<f64> = None;
    let mut theta_range: Option<(f64, f64)> = None;
    let mut previous_theta: Vec<f64> = controller.theta().map(<[f64]>::to_vec).unwrap_or_default();

    for n in 0..cfg.cycles {
        let step = env_step(
            &state,
            hidden,
            &action,
            truth,
            &belief_model,
            cost_params,
            &mut streams.intruder,
        )
        .map_err(|source| Error::Step { step: n, source })?;

        let mut p_err = None;
        if let Some(est) = &mut estimate {
            est.update(n + 1, &state.belief, &step.state.belief)
                .map_err(|source| Error::Step { step: n, source })?;
            if (n + 1) % cfg.cache_refresh == 0 {
                belief_model = est
                    .to_model()
                    .map_err(|source| Error::Step { step: n, source })?;
                cache = PowerCache::new(&belief_model, cfg.features)?;
                controller.refresh_model(&cache);
            }
            p_err = Some(est.max_error(truth));
        }

        let next_features = cache.state_features(&step.state);
        let next_action = controller.advance(
            n,
            &Step {
                state: &state,
                features: &features,
                action: &action,
                cost: step.cost,
                next_state: &step.state,
                next_features: &next_features,
            },
            decision_rng,
        );

        let theta = controller.theta();
        if let Some(theta) = theta {
            if n >= tail_start {
                let change = linalg::max_abs_diff(theta, &previous_theta);
                tail_drift = Some(tail_drift.map_or(change, |d: f64| d.max(change)));
            }
            previous_theta.clear();
            previous_theta.extend_from_slice(theta);
            let (lo, hi) = theta.iter().fold(
                theta_range.unwrap_or((f64::INFINITY, f64::NEG_INFINITY)),
                |(lo, hi), &t| (lo.min(t), hi.max(t)),
            );
            theta_range = Some((lo, hi));
        }

        series.push(StepRecord {
            step: n,
            detect: matches!(step.observation, Observation::Located(_)),
            awake: state.awake_count(),
            cost: step.cost,
            j_hat: controller.average_cost(),
            theta_norm: theta.map(linalg::inf_norm),
            w_norm: controller.policy_weights().map(linalg::inf_norm),
            p_err,
        });

        state = step.state;
        hidden = step.hidden;
        features = next_features;
        action = next_action;
    }

    let mut summary = RunSummary::from_series(
        cfg.algorithm,
        cfg.estimate_p,
        cfg.rows,
        cfg.cols,
        cfg.seed,
        &series,
    );
    summary.tail_drift = tail_drift;
    summary.theta_min = theta_range.map(|r| r.0);
    summary.theta_max = theta_range.map(|r| r.1);
    summary.wall_clock_s = started.elapsed().as_secs_f64();
    Ok((series, summary))
}

/// File stem shared by a run's series and summary files.
pub fn run_stem(cfg: &RunConfig) -> String {
    let p = if cfg.estimate_p { "-estp" } else { "" };
    format!(
        "{}{p}-{}x{}-s{}",
        cfg.algorithm, cfg.rows, cfg.cols, cfg.seed
    )
}

/// Writes `<stem>.csv` and `<stem>.summary.csv` into `dir`.
pub fn write_outputs(
    dir: &Path,
    cfg: &RunConfig,
    series: &MetricsSeries,
    summary: &RunSummary,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = run_stem(cfg);
    let series_path = dir.join(format!("{stem}.csv"));
    let summary_path = dir.join(format!("{stem}.summary.csv"));
    emit_csv(series, &series_path)?;
    write_summary(summary, &summary_path)?;
    Ok((series_path, summary_path))
}

/// Every `*.summary.csv` directly inside `dir`, in name order.
pub fn summary_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.to_string_lossy().ends_with(".summary.csv") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
