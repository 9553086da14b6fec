//! Deterministic signal-processing primitives.

mod fir;
mod prng;
mod spectral;

pub use fir::{
    design_lowpass, design_rrc, fir_apply, resample, upsample_zero_insert, FirFilter, FromComplex,
};
pub use prng::{generate_bits, make_prng, Mt19937};
pub use spectral::{dft_filter, super_gaussian_gain, Spectrum};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Real-valued samples with their sample rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSequence {
    samples: Vec<f64>,
    sample_rate: f64,
}

/// Complex baseband samples with their sample rate in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

fn check_rate(sample_rate: f64) -> Result<()> {
    if sample_rate.is_finite() && sample_rate > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("sample rate must be positive, got {sample_rate}")))
    }
}

impl RealSequence {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite sample at index {i}")));
        }
        Ok(RealSequence {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    pub fn to_complex(&self) -> ComplexSequence {
        ComplexSequence {
            samples: self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<f64>, sample_rate: f64) -> Self {
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        RealSequence {
            samples,
            sample_rate,
        }
    }
}

impl ComplexSequence {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite sample at index {i}")));
        }
        Ok(ComplexSequence {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    /// Squared magnitude of every sample.
    pub fn intensity(&self) -> RealSequence {
        RealSequence {
            samples: self.samples.iter().map(|v| v.norm_sqr()).collect(),
            sample_rate: self.sample_rate,
        }
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        ComplexSequence {
            samples,
            sample_rate,
        }
    }
}

/// A sampled sequence that FIR filters can run over.
pub trait SampleSequence: Sized {
    type Sample: Copy
        + Default
        + Into<Complex64>
        + fir::FromComplex
        + std::ops::Add<Output = Self::Sample>
        + std::ops::Mul<f64, Output = Self::Sample>;

    fn samples(&self) -> &[Self::Sample];
    fn sample_rate(&self) -> f64;
    fn with_samples(samples: Vec<Self::Sample>, sample_rate: f64) -> Self;
}

impl SampleSequence for RealSequence {
    type Sample = f64;

    fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    fn with_samples(samples: Vec<f64>, sample_rate: f64) -> Self {
        RealSequence::from_parts_unchecked(samples, sample_rate)
    }
}

impl SampleSequence for ComplexSequence {
    type Sample = Complex64;

    fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    fn with_samples(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        ComplexSequence::from_parts_unchecked(samples, sample_rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rate_and_nan() {
        assert!(RealSequence::new(vec![1.0], 0.0).is_err());
        assert!(RealSequence::new(vec![f64::NAN], 1.0).is_err());
        assert!(ComplexSequence::new(vec![Complex64::new(f64::INFINITY, 0.0)], 1.0).is_err());
        assert!(RealSequence::new(vec![], 1.0).is_ok());
    }

    #[test]
    fn intensity_is_squared_magnitude() {
        let s = ComplexSequence::new(vec![Complex64::new(3.0, 4.0)], 1.0).unwrap();
        assert_eq!(s.intensity().samples(), &[25.0]);
    }
}
