//! Online stochastic-approximation estimate of the intruder's mobility matrix.
//!
//! ```text
//! P_hat <- Pi(P_hat + d(n) p_n p_{n+1}^T)
//! ```
//!
//! where `p_n` is the location vector at step `n` (a point mass when the
//! intruder was seen, the belief otherwise) and `Pi` clamps each row to
//! `[0, 1]` and renormalises it.

use alloc::vec;
use alloc::vec::Vec;

use crate::env::TransitionModel;
use crate::rl::StepSchedule;
use crate::{linalg, Error, Result};

/// Clamp-and-renormalise each row of the `n x n` matrix `m` in place; an
/// all-zero row becomes uniform.
pub fn project_stochastic(m: &mut [f64], n: usize) {
    for row in m.chunks_mut(n) {
        project_row(row);
    }
}

fn project_row(row: &mut [f64]) {
    row.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0));
    let sum: f64 = row.iter().sum();
    if sum > 0.0 {
        row.iter_mut().for_each(|x| *x /= sum);
    } else {
        let u = 1.0 / row.len() as f64;
        row.iter_mut().for_each(|x| *x = u);
    }
}

/// One estimator step with step size `step` on a row-major matrix.
pub fn update_p_estimate(p_hat: &[f64], now: &[f64], next: &[f64], step: f64) -> Result<Vec<f64>> {
    let n = now.len();
    check_dims(n, p_hat.len(), next.len())?;
    let mut out = p_hat.to_vec();
    apply_update(&mut out, now, next, step);
    Ok(out)
}

fn check_dims(n: usize, matrix_len: usize, next_len: usize) -> Result<()> {
    if matrix_len != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: matrix_len,
        });
    }
    if next_len != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: next_len,
        });
    }
    Ok(())
}

/// Rows with zero weight in `now` are untouched and already stochastic, so
/// only the affected rows are projected.
fn apply_update(matrix: &mut [f64], now: &[f64], next: &[f64], step: f64) {
    let n = now.len();
    for (i, &weight) in now.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let row = &mut matrix[i * n..(i + 1) * n];
        for (x, &y) in row.iter_mut().zip(next) {
            *x += step * weight * y;
        }
        project_row(row);
    }
}

#[derive(Debug, Clone)]
pub struct MobilityEstimate {
    cells: usize,
    matrix: Vec<f64>,
    schedule: StepSchedule,
}

impl MobilityEstimate {
    /// Starts from the uniform matrix.
    pub fn uniform(cells: usize, schedule: StepSchedule) -> Self {
        Self {
            cells,
            matrix: vec![1.0 / cells as f64; cells * cells],
            schedule,
        }
    }

    pub fn from_model(model: &TransitionModel, schedule: StepSchedule) -> Self {
        Self {
            cells: model.cells(),
            matrix: model.as_slice().to_vec(),
            schedule,
        }
    }

    /// Default `d(n) = n^-0.51`.
    pub fn default_schedule() -> StepSchedule {
        StepSchedule::power(0.51).expect("valid exponent")
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.matrix
    }

    /// Update with the location vectors at steps `n` and `n + 1` (`n >= 1`).
    pub fn update(&mut self, n: u64, now: &[f64], next: &[f64]) -> Result<()> {
        check_dims(now.len(), self.matrix.len(), next.len())?;
        apply_update(&mut self.matrix, now, next, self.schedule.at(n));
        Ok(())
    }

    pub fn to_model(&self) -> Result<TransitionModel> {
        TransitionModel::new(self.cells, self.matrix.clone())
    }

    /// `max_{i,j} |P_hat(i,j) - P(i,j)|`.
    pub fn max_error(&self, truth: &TransitionModel) -> f64 {
        linalg::max_abs_diff(&self.matrix, truth.as_slice())
    }

    /// Largest deviation of any row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        self.matrix
            .chunks(self.cells)
            .map(|r| libm::fabs(r.iter().sum::<f64>() - 1.0))
            .fold(0.0, f64::max)
    }
}
