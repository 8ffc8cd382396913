use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cell index {index} out of range for {cells} cells")]
    InvalidCell { index: usize, cells: usize },

    #[error("row {row} is not a probability distribution (sum {sum}, min entry {min})")]
    NotStochastic { row: usize, sum: f64, min: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sleep time {value} exceeds the upper bound {max}")]
    SleepOutOfRange { value: usize, max: usize },

    #[error("invalid step-size schedule: {0}")]
    InvalidSchedule(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("value iteration for sensor {sensor} did not converge after {sweeps} sweeps (last change {residual})")]
    NonConvergence {
        sensor: usize,
        sweeps: usize,
        residual: f64,
    },
}
