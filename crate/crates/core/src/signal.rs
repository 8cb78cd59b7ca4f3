use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Complex baseband samples at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self::new(alloc::vec![Complex64::new(0.0, 0.0); len], sample_rate_hz)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        math::mean_power(&self.samples)
    }

    pub fn peak_power(&self) -> f64 {
        math::peak_power(&self.samples)
    }

    pub fn is_finite(&self) -> bool {
        self.samples
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Non-empty and finite, as required by every measurement.
    pub fn check_measurable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Empty);
        }
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn scaled(&self, gain: Complex64) -> Self {
        Self::new(
            self.samples.iter().map(|v| v * gain).collect(),
            self.sample_rate_hz,
        )
    }
}
