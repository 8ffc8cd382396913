use crate::{Error, Result};

/// Step sizes `scale / n^exponent`, `n >= 1`.
///
/// Exponents are restricted to `(0.5, 1]` so that every schedule is
/// non-summable and square-summable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    exponent: f64,
    scale: f64,
}

impl StepSchedule {
    pub fn harmonic() -> Self {
        Self {
            exponent: 1.0,
            scale: 1.0,
        }
    }

    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.5 && exponent <= 1.0) {
            return Err(Error::InvalidSchedule("exponent must lie in (0.5, 1]"));
        }
        Ok(Self {
            exponent,
            scale: 1.0,
        })
    }

    /// `k * a(n)`.
    pub fn scaled(self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidSchedule("scale must be positive"));
        }
        Ok(Self { scale, ..self })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Value at `n`; indices below one are treated as one.
    pub fn at(&self, n: u64) -> f64 {
        let n = n.max(1) as f64;
        if self.exponent == 1.0 {
            self.scale / n
        } else {
            self.scale / libm::pow(n, self.exponent)
        }
    }

    /// `self(n) / other(n) -> 0`.
    pub fn is_slower_than(&self, other: &StepSchedule) -> bool {
        self.exponent > other.exponent
    }
}

pub fn step_size(n: u64, schedule: &StepSchedule) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidSchedule("step index starts at 1"));
    }
    Ok(schedule.at(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(step_size(4, &StepSchedule::harmonic()).unwrap(), 0.25);
        assert_eq!(
            step_size(1, &StepSchedule::power(0.55).unwrap()).unwrap(),
            1.0
        );
        assert!(step_size(0, &StepSchedule::harmonic()).is_err());
        let c = StepSchedule::power(0.55).unwrap().scaled(2.0).unwrap();
        assert!((c.at(16) - 2.0 / 16f64.powf(0.55)).abs() < 1e-15);
    }

    #[test]
    fn exponent_range() {
        assert!(StepSchedule::power(0.5).is_err());
        assert!(StepSchedule::power(1.01).is_err());
        assert!(StepSchedule::power(0.51).is_ok());
        assert!(StepSchedule::harmonic().scaled(0.0).is_err());
    }

    #[test]
    fn timescale_ratio_vanishes() {
        let slow = StepSchedule::harmonic();
        let fast = StepSchedule::power(0.55).unwrap();
        assert!(slow.is_slower_than(&fast));
        assert!(!fast.is_slower_than(&slow));
        let n = 1_000_000;
        // n^{-0.45} at 1e6 is about 2.51e-3.
        assert!(slow.at(n) / fast.at(n) < 2.6e-3);
    }
}
