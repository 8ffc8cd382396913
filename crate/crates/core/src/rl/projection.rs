use alloc::vec;
use alloc::vec::Vec;

use crate::{linalg, Error, Result};

/// Coordinate-wise box `[lo, hi]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBounds {
    lo: f64,
    hi: f64,
}

impl BoxBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig(
                "box bounds must be finite with lo <= hi",
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn project(&self, v: &mut [f64]) {
        for x in v {
            *x = x.clamp(self.lo, self.hi);
        }
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.iter().all(|x| (self.lo..=self.hi).contains(x))
    }
}

impl Default for BoxBounds {
    fn default() -> Self {
        Self { lo: 1.0, hi: 100.0 }
    }
}

pub fn project_box(v: &[f64], bounds: BoxBounds) -> Vec<f64> {
    let mut out = v.to_vec();
    bounds.project(&mut out);
    out
}

/// A parameter vector that is kept inside its box after every change.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedVector {
    values: Vec<f64>,
    bounds: BoxBounds,
}

/// Q-value weights `theta`.
pub type QParams = BoundedVector;
/// Boltzmann policy weights `w`.
pub type PolicyParams = BoundedVector;

impl BoundedVector {
    pub fn new(values: Vec<f64>, bounds: BoxBounds) -> Self {
        let mut values = values;
        bounds.project(&mut values);
        Self { values, bounds }
    }

    /// Every coordinate at the box's lower corner.
    pub fn at_lower_corner(dim: usize, bounds: BoxBounds) -> Self {
        Self {
            values: vec![bounds.lo(); dim],
            bounds,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> BoxBounds {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `v <- project(v + scale * direction)`.
    pub fn step(&mut self, direction: &[f64], scale: f64) {
        debug_assert_eq!(direction.len(), self.values.len());
        for (v, d) in self.values.iter_mut().zip(direction) {
            *v += scale * d;
        }
        self.bounds.project(&mut self.values);
    }

    pub fn inf_norm(&self) -> f64 {
        linalg::inf_norm(&self.values)
    }
}
