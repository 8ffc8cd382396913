//! Run configuration and its flat `key = value` file format.
//!
//! One key per line; `#` starts a comment; blank lines are ignored. Unknown
//! keys and repeated keys are errors.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sleepwake_core::baselines::Convention;
use sleepwake_core::env::CostParams;
use sleepwake_core::features::{FeatureParams, ForcedFeature};
use sleepwake_core::rl::{BoxBounds, StepSchedule};

use crate::{Error, Result};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "SLEEPWAKE_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    QsaA,
    TqsaA,
    QsaD,
    TqsaD,
    Fcr,
    Qmdp,
    Random,
    AllAwake,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::QsaA,
        Algorithm::TqsaA,
        Algorithm::QsaD,
        Algorithm::TqsaD,
        Algorithm::Fcr,
        Algorithm::Qmdp,
        Algorithm::Random,
        Algorithm::AllAwake,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::QsaA => "qsa-a",
            Algorithm::TqsaA => "tqsa-a",
            Algorithm::QsaD => "qsa-d",
            Algorithm::TqsaD => "tqsa-d",
            Algorithm::Fcr => "fcr",
            Algorithm::Qmdp => "qmdp",
            Algorithm::Random => "random",
            Algorithm::AllAwake => "all-awake",
        }
    }

    pub fn is_learner(self) -> bool {
        matches!(
            self,
            Algorithm::QsaA | Algorithm::TqsaA | Algorithm::QsaD | Algorithm::TqsaD
        )
    }

    pub fn is_two_timescale(self) -> bool {
        matches!(self, Algorithm::TqsaA | Algorithm::TqsaD)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionKind {
    Discounted,
    Relative,
}

impl FromStr for ConventionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discounted" => Ok(ConventionKind::Discounted),
            "relative" => Ok(ConventionKind::Relative),
            _ => Err(Error::Config(format!("unknown baseline convention `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rows: usize,
    pub cols: usize,
    pub algorithm: Algorithm,
    pub cycles: u64,
    pub seed: u64,
    /// Energy cost `c` per awake sensor per step.
    pub energy: f64,
    pub features: FeatureParams,
    pub gamma: f64,
    pub epsilon: f64,
    pub delta_spsa: f64,
    /// `c(n) = k_avg a(n)`.
    pub k_avg: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    /// Exponent of the QSA step size.
    pub qsa_exponent: f64,
    /// Exponent of the fast policy step `a(n)`.
    pub policy_exponent: f64,
    /// Exponent of the slow critic step `b(n)`.
    pub critic_exponent: f64,
    pub theta0: f64,
    pub w0: f64,
    pub j0: f64,
    pub estimate_p: bool,
    /// Exponent of the mobility-estimate step `d(n)`.
    pub mobility_exponent: f64,
    pub cache_refresh: u64,
    pub convention: ConventionKind,
    /// Reference cell of the relative baseline convention.
    pub convention_reference: usize,
    pub fcr_depth: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    /// Window for the tail parameter-drift statistic.
    pub drift_window: u64,
    pub p_matrix: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rows: 11,
            cols: 11,
            algorithm: Algorithm::TqsaA,
            cycles: 6000,
            seed: 0,
            energy: 0.1,
            features: FeatureParams::default(),
            gamma: 0.9,
            epsilon: 0.1,
            delta_spsa: 1e-3,
            k_avg: 1.0,
            box_lo: 1.0,
            box_hi: 100.0,
            qsa_exponent: 1.0,
            policy_exponent: 0.55,
            critic_exponent: 1.0,
            theta0: 1.0,
            w0: 1.0,
            j0: 0.0,
            estimate_p: false,
            mobility_exponent: 0.51,
            cache_refresh: 100,
            convention: ConventionKind::Discounted,
            convention_reference: 0,
            fcr_depth: 2,
            tol: 1e-9,
            max_sweeps: 10_000,
            drift_window: 500,
            p_matrix: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> std::result::Result<T, String> {
    raw.parse()
        .map_err(|_| format!("invalid value `{raw}` for `{key}`"))
}

fn boolean(key: &str, raw: &str) -> std::result::Result<bool, String> {
    match raw {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("invalid value `{raw}` for `{key}`")),
    }
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, raw: &str) -> std::result::Result<(), String> {
        match key {
            "rows" => self.rows = value(key, raw)?,
            "cols" => self.cols = value(key, raw)?,
            "algo" => self.algorithm = raw.parse().map_err(|e: Error| e.to_string())?,
            "cycles" => self.cycles = value(key, raw)?,
            "seed" => self.seed = value(key, raw)?,
            "c" => self.energy = value(key, raw)?,
            "xi" => self.features.xi = value(key, raw)?,
            "top" => self.features.top = value(key, raw)?,
            "horizon" => self.features.horizon = value(key, raw)?,
            "u_max" => self.features.max_sleep = value(key, raw)?,
            "forced_feature" => {
                self.features.forced = match raw {
                    "pruned" => ForcedFeature::Pruned,
                    "raw" => ForcedFeature::Raw,
                    _ => return Err(format!("invalid value `{raw}` for `{key}`")),
                }
            }
            "gamma" => self.gamma = value(key, raw)?,
            "epsilon" => self.epsilon = value(key, raw)?,
            "delta_spsa" => self.delta_spsa = value(key, raw)?,
            "k_avg" => self.k_avg = value(key, raw)?,
            "box_lo" => self.box_lo = value(key, raw)?,
            "box_hi" => self.box_hi = value(key, raw)?,
            "qsa_exponent" => self.qsa_exponent = value(key, raw)?,
            "policy_exponent" => self.policy_exponent = value(key, raw)?,
            "critic_exponent" => self.critic_exponent = value(key, raw)?,
            "theta0" => self.theta0 = value(key, raw)?,
            "w0" => self.w0 = value(key, raw)?,
            "j0" => self.j0 = value(key, raw)?,
            "estimate_p" => self.estimate_p = boolean(key, raw)?,
            "mobility_exponent" => self.mobility_exponent = value(key, raw)?,
            "cache_refresh" => self.cache_refresh = value(key, raw)?,
            "baseline_convention" => {
                self.convention = raw.parse().map_err(|e: Error| e.to_string())?
            }
            "convention_reference" => self.convention_reference = value(key, raw)?,
            "fcr_depth" => self.fcr_depth = value(key, raw)?,
            "tol" => self.tol = value(key, raw)?,
            "max_sweeps" => self.max_sweeps = value(key, raw)?,
            "drift_window" => self.drift_window = value(key, raw)?,
            "p_matrix" => self.p_matrix = Some(PathBuf::from(raw)),
            "out" => self.out_dir = PathBuf::from(raw),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies every assignment in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, raw) = body
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{body}`")))?;
            let (key, raw) = (key.trim(), raw.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            self.set(key, raw).map_err(err)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cost(&self) -> Result<CostParams> {
        Ok(CostParams::new(self.energy)?)
    }

    pub fn bounds(&self) -> Result<BoxBounds> {
        Ok(BoxBounds::new(self.box_lo, self.box_hi)?)
    }

    fn schedule(exponent: f64) -> Result<StepSchedule> {
        Ok(StepSchedule::power(exponent)?)
    }

    pub fn qsa_schedule(&self) -> Result<StepSchedule> {
        Self::schedule(self.qsa_exponent)
    }

    pub fn policy_schedule(&self) -> Result<StepSchedule> {
        Self::schedule(self.policy_exponent)
    }

    pub fn critic_schedule(&self) -> Result<StepSchedule> {
        Self::schedule(self.critic_exponent)
    }

    pub fn mobility_schedule(&self) -> Result<StepSchedule> {
        Self::schedule(self.mobility_exponent)
    }

    pub fn convention(&self) -> Convention {
        match self.convention {
            ConventionKind::Discounted => Convention::Discounted(self.gamma),
            ConventionKind::Relative => Convention::Relative {
                reference: self.convention_reference,
            },
        }
    }

    /// The slowest learner schedule that the mobility estimate must outpace.
    fn learner_schedule(&self) -> Result<StepSchedule> {
        if self.algorithm.is_two_timescale() {
            self.critic_schedule()
        } else {
            self.qsa_schedule()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.rows == 0 || self.cols == 0 {
            return bad("grid must have at least one row and one column");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.delta_spsa > 0.0) {
            return bad("delta_spsa must be positive");
        }
        if !(self.k_avg > 0.0) {
            return bad("k_avg must be positive");
        }
        if self.cache_refresh == 0 {
            return bad("cache_refresh must be positive");
        }
        if self.drift_window == 0 {
            return bad("drift_window must be positive");
        }
        self.features.validate()?;
        self.cost()?;
        let bounds = self.bounds()?;
        for (name, v) in [("theta0", self.theta0), ("w0", self.w0)] {
            if !(v >= bounds.lo() && v <= bounds.hi()) {
                return Err(Error::Config(format!(
                    "{name} lies outside [box_lo, box_hi]"
                )));
            }
        }
        self.qsa_schedule()?;
        let policy = self.policy_schedule()?;
        let critic = self.critic_schedule()?;
        if self.algorithm.is_two_timescale() && !critic.is_slower_than(&policy) {
            return bad("critic_exponent must exceed policy_exponent");
        }
        let mobility = self.mobility_schedule()?;
        if self.estimate_p {
            if !self.algorithm.is_learner() {
                return bad("estimate_p is only supported for the learning algorithms");
            }
            if !self.learner_schedule()?.is_slower_than(&mobility) {
                return bad("mobility_exponent must be below the learner's step exponent");
            }
        }
        if matches!(self.algorithm, Algorithm::Fcr) && self.fcr_depth == 0 {
            return bad("fcr_depth must be at least 1");
        }
        if self.convention == ConventionKind::Relative && self.convention_reference >= self.cells()
        {
            return bad("convention_reference is outside the grid");
        }
        if !(self.tol > 0.0) || self.max_sweeps == 0 {
            return bad("tol and max_sweeps must be positive");
        }
        Ok(())
    }
}
