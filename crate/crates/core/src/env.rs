//! Ground-truth intrusion-tracking model.
//!
//! Cells and sensors are indexed `0..N` in row-major order. The intruder's
//! location is hidden; the controller sees the sufficient statistic
//! `(belief, residual sleep times)` and the per-step observation.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linalg;
use crate::{Error, Result};

/// Row sums of externally supplied matrices must be within this of one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    rows: usize,
    cols: usize,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfig(
                "grid must have at least one row and one column",
            ));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.rows && col < self.cols);
        row * self.cols + col
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    /// The cell itself followed by its (up to eight) grid neighbours.
    pub fn neighbourhood(&self, index: usize) -> Vec<usize> {
        let (r, c) = self.coords(index);
        let mut out = vec![index];
        for dr in -1isize..=1 {
            for dc in -1isize..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr >= 0 && nc >= 0 && (nr as usize) < self.rows && (nc as usize) < self.cols {
                    out.push(self.index(nr as usize, nc as usize));
                }
            }
        }
        out
    }
}

/// Row-stochastic `N x N` intruder mobility matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    cells: usize,
    probs: Vec<f64>,
}

impl TransitionModel {
    /// Validates entries and row sums (within [`ROW_SUM_TOLERANCE`]) and
    /// renormalises each row so the stored matrix is stochastic to rounding.
    pub fn new(cells: usize, mut probs: Vec<f64>) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidConfig(
                "transition model needs at least one cell",
            ));
        }
        if probs.len() != cells * cells {
            return Err(Error::DimensionMismatch {
                expected: cells * cells,
                found: probs.len(),
            });
        }
        for (row, chunk) in probs.chunks_mut(cells).enumerate() {
            let sum: f64 = chunk.iter().sum();
            let min = chunk.iter().copied().fold(f64::INFINITY, f64::min);
            let max = chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(min >= 0.0 && max <= 1.0 && libm::fabs(sum - 1.0) <= ROW_SUM_TOLERANCE) {
                return Err(Error::NotStochastic { row, sum, min });
            }
            chunk.iter_mut().for_each(|x| *x /= sum);
        }
        Ok(Self { cells, probs })
    }

    pub fn identity(cells: usize) -> Self {
        Self {
            cells,
            probs: linalg::identity(cells),
        }
    }

    /// Uniform move to the current cell or any of its grid neighbours.
    pub fn lazy_random_walk(grid: &GridSpec) -> Self {
        let n = grid.cells();
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            let hood = grid.neighbourhood(i);
            let w = 1.0 / hood.len() as f64;
            for j in hood {
                probs[i * n + j] = w;
            }
        }
        Self { cells: n, probs }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.probs[from * self.cells + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.probs[from * self.cells..(from + 1) * self.cells]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// One-step belief propagation `p P`.
    pub fn propagate(&self, p: &[f64]) -> Vec<f64> {
        linalg::vec_mat(p, &self.probs, self.cells)
    }

    /// Max-norm distance between two models of equal size.
    pub fn max_abs_diff(&self, other: &TransitionModel) -> f64 {
        linalg::max_abs_diff(&self.probs, &other.probs)
    }
}

/// Intruder location, hidden from the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HiddenState(usize);

impl HiddenState {
    pub fn new(location: usize, cells: usize) -> Result<Self> {
        if location >= cells {
            return Err(Error::InvalidCell {
                index: location,
                cells,
            });
        }
        Ok(Self(location))
    }

    pub fn location(&self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    Located(usize),
    Unknown,
}

impl Observation {
    pub fn is_detection(&self) -> bool {
        matches!(self, Observation::Located(_))
    }
}

/// Per-sensor sleep time; entries of sensors that are already asleep are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SleepAction(pub Vec<usize>);

impl SleepAction {
    pub fn all_awake(cells: usize) -> Self {
        Self(vec![0; cells])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn validate(&self, cells: usize, max_sleep: usize) -> Result<()> {
        if self.0.len() != cells {
            return Err(Error::DimensionMismatch {
                expected: cells,
                found: self.0.len(),
            });
        }
        match self.0.iter().find(|&&u| u > max_sleep) {
            Some(&value) => Err(Error::SleepOutOfRange {
                value,
                max: max_sleep,
            }),
            None => Ok(()),
        }
    }
}

/// Controller's sufficient statistic: belief over the intruder's cell and
/// the residual sleep time of every sensor (`0` means awake).
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientState {
    pub belief: Vec<f64>,
    pub residual: Vec<usize>,
}

impl SufficientState {
    /// Uniform belief, every sensor awake.
    pub fn initial(cells: usize) -> Self {
        Self {
            belief: vec![1.0 / cells as f64; cells],
            residual: vec![0; cells],
        }
    }

    pub fn cells(&self) -> usize {
        self.residual.len()
    }

    pub fn is_awake(&self, sensor: usize) -> bool {
        self.residual[sensor] == 0
    }

    pub fn awake_count(&self) -> usize {
        self.residual.iter().filter(|&&r| r == 0).count()
    }
}

/// Per-awake-sensor energy cost `c`, in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    energy: f64,
}

impl CostParams {
    pub fn new(energy: f64) -> Result<Self> {
        if !(energy > 0.0 && energy < 1.0) {
            return Err(Error::InvalidConfig("energy cost must lie in (0, 1)"));
        }
        Ok(Self { energy })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Upper bound on any single-stage cost for `cells` sensors.
    pub fn bound(&self, cells: usize) -> f64 {
        self.energy * cells as f64 + 1.0
    }
}

impl Default for CostParams {
    fn default() -> Self {
        Self { energy: 0.1 }
    }
}

/// Sample a categorical index from a probability row.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let target: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = j;
            if target < acc {
                return j;
            }
        }
    }
    last_positive
}

pub fn step_intruder<R: Rng + ?Sized>(
    hidden: HiddenState,
    model: &TransitionModel,
    rng: &mut R,
) -> Result<HiddenState> {
    let l = hidden.location();
    if l >= model.cells() {
        return Err(Error::InvalidCell {
            index: l,
            cells: model.cells(),
        });
    }
    Ok(HiddenState(sample_index(model.row(l), rng)))
}

/// Awake sensors take their assigned sleep time; sleeping ones count down.
pub fn evolve_residuals(residual: &[usize], action: &SleepAction) -> Vec<usize> {
    debug_assert_eq!(residual.len(), action.0.len());
    residual
        .iter()
        .zip(&action.0)
        .map(|(&r, &a)| if r > 0 { r - 1 } else { a })
        .collect()
}

/// `c` per awake sensor plus one if the intruder's cell is asleep.
pub fn stage_cost(residual: &[usize], hidden: HiddenState, cost: CostParams) -> f64 {
    let awake = residual.iter().filter(|&&r| r == 0).count();
    let miss = if residual[hidden.location()] > 0 {
        1.0
    } else {
        0.0
    };
    cost.energy() * awake as f64 + miss
}

pub fn observe(hidden: HiddenState, residual: &[usize]) -> Observation {
    let l = hidden.location();
    if residual[l] == 0 {
        Observation::Located(l)
    } else {
        Observation::Unknown
    }
}

/// Point mass on the next location if its sensor is awake, else `p P`.
pub fn update_belief(
    belief: &[f64],
    next_residual: &[usize],
    next_hidden: HiddenState,
    model: &TransitionModel,
) -> Vec<f64> {
    let l = next_hidden.location();
    if next_residual[l] == 0 {
        let mut out = vec![0.0; belief.len()];
        out[l] = 1.0;
        out
    } else {
        model.propagate(belief)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub state: SufficientState,
    pub hidden: HiddenState,
    /// Observation at the pre-transition step, consistent with `cost`.
    pub observation: Observation,
    pub cost: f64,
}

/// Advance the model by one step.
///
/// The intruder moves according to `truth`; the belief is propagated with
/// `belief_model` (the same matrix when the mobility model is known, an
/// estimate otherwise). Cost and observation refer to the current `(r, l)`.
pub fn env_step<R: Rng + ?Sized>(
    state: &SufficientState,
    hidden: HiddenState,
    action: &SleepAction,
    truth: &TransitionModel,
    belief_model: &TransitionModel,
    cost: CostParams,
    rng: &mut R,
) -> Result<EnvStep> {
    let n = state.cells();
    for found in [
        state.belief.len(),
        action.0.len(),
        truth.cells(),
        belief_model.cells(),
    ] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    let observation = observe(hidden, &state.residual);
    let g = stage_cost(&state.residual, hidden, cost);
    let next_hidden = step_intruder(hidden, truth, rng)?;
    let residual = evolve_residuals(&state.residual, action);
    let belief = update_belief(&state.belief, &residual, next_hidden, belief_model);
    Ok(EnvStep {
        state: SufficientState { belief, residual },
        hidden: next_hidden,
        observation,
        cost: g,
    })
}

/// Uniformly placed intruder with the default initial statistic.
pub fn initial_condition<R: Rng + ?Sized>(
    cells: usize,
    rng: &mut R,
) -> (SufficientState, HiddenState) {
    let l = rng.gen_range(0..cells);
    (SufficientState::initial(cells), HiddenState(l))
}
