//! Single-block DFT filtering.

use super::ComplexSequence;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// DFT of a whole sequence, kept around so several transfer functions can be
/// applied to the same spectrum.
#[derive(Debug, Clone)]
pub struct Spectrum {
    bins: Vec<Complex64>,
    sample_rate: f64,
}

impl Spectrum {
    pub fn of(signal: &ComplexSequence) -> Result<Self> {
        if signal.len() < 2 {
            return Err(Error::param("DFT filtering needs at least two samples"));
        }
        let mut bins = signal.samples().to_vec();
        FftPlanner::new()
            .plan_fft_forward(bins.len())
            .process(&mut bins);
        Ok(Spectrum {
            bins,
            sample_rate: signal.sample_rate(),
        })
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    /// Frequency of bin `k` in Hz, mapped onto `[-fs/2, fs/2)`.
    pub fn frequency(&self, k: usize) -> f64 {
        bin_frequency(k, self.bins.len(), self.sample_rate)
    }

    /// Multiplies every bin by `transfer(f)` and returns to the time domain.
    pub fn filtered<F>(&self, transfer: F) -> ComplexSequence
    where
        F: Fn(f64) -> Complex64,
    {
        let n = self.bins.len();
        let mut out: Vec<Complex64> = self
            .bins
            .iter()
            .enumerate()
            .map(|(k, &b)| b * transfer(bin_frequency(k, n, self.sample_rate)))
            .collect();
        FftPlanner::new().plan_fft_inverse(n).process(&mut out);
        let scale = 1.0 / n as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        ComplexSequence::from_parts_unchecked(out, self.sample_rate)
    }
}

fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    if 2 * (k as usize) < n {
        k * fs / n_f
    } else {
        (k - n_f) * fs / n_f
    }
}

/// `inverse_dft(transfer(f) * dft(signal))` over the whole signal.
pub fn dft_filter<F>(signal: &ComplexSequence, transfer: F) -> Result<ComplexSequence>
where
    F: Fn(f64) -> Complex64,
{
    Ok(Spectrum::of(signal)?.filtered(transfer))
}

/// Amplitude response of a super-Gaussian band-pass of order `order`, equal to
/// `1/sqrt(2)` (−3 dB in power) at `center ± bw_3db / 2`.
pub fn super_gaussian_gain(f: f64, center: f64, bw_3db: f64, order: u32) -> f64 {
    let x = (f - center) / (bw_3db / 2.0);
    (-(std::f64::consts::LN_2 / 2.0) * x.powi(2 * order as i32)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{design_rrc, fir_apply, make_prng, resample, upsample_zero_insert, RealSequence};
    use rand::Rng;
    use std::f64::consts::PI;

    fn random_signal(seed: u64, n: usize) -> ComplexSequence {
        let mut rng = make_prng(seed);
        ComplexSequence::new(
            (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect(),
            1e9,
        )
        .unwrap()
    }

    #[test]
    fn unit_transfer_is_identity() {
        let x = random_signal(1, 1000);
        let y = dft_filter(&x, |_| Complex64::new(1.0, 0.0)).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn all_pass_conserves_energy() {
        let mut rng = make_prng(99);
        for case in 0..100 {
            let k = rng.random_range(4..=14);
            let x = random_signal(1000 + case, 1 << k);
            let a: f64 = rng.random::<f64>() * 50.0;
            let b: f64 = rng.random::<f64>() * 1e-9;
            let y = dft_filter(&x, |f| Complex64::from_polar(1.0, a * (b * f).powi(2) + b * f))
                .unwrap();
            let rel = (y.energy() - x.energy()).abs() / x.energy();
            assert!(rel < 1e-9, "case {case}: rel {rel}");
        }
    }

    #[test]
    fn band_stop_rejects_tone() {
        let n = 4096;
        let fs = 1e9;
        let f0 = 100.0 * fs / n as f64;
        let x = ComplexSequence::new(
            (0..n)
                .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f0 * i as f64 / fs))
                .collect(),
            fs,
        )
        .unwrap();
        let y = dft_filter(&x, |f| {
            if (f - f0).abs() < 5e6 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .unwrap();
        assert!(y.energy() < 1e-6 * x.energy());
    }

    #[test]
    fn frequency_grid_covers_half_open_nyquist_range() {
        let x = random_signal(3, 8);
        let s = Spectrum::of(&x).unwrap();
        let f: Vec<f64> = (0..8).map(|k| s.frequency(k)).collect();
        assert_eq!(f[0], 0.0);
        assert_eq!(f[4], -0.5e9);
        assert_eq!(f[7], -0.125e9);
        assert!(dft_filter(&random_signal(3, 1), |_| Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn super_gaussian_is_3db_at_band_edge() {
        let g = super_gaussian_gain(12e9 + 8e9, 12e9, 16e9, 2);
        assert!((g * g - 0.5).abs() < 1e-12);
        assert_eq!(super_gaussian_gain(4e9, 4e9, 16e9, 2), 1.0);
    }

    /// Decimating 8 -> 2 samples/symbol keeps the in-band power spectrum of an
    /// RRC-shaped 32 GBd signal within 0.1 dB, compared in 1 GHz bins.
    #[test]
    fn decimation_preserves_in_band_spectrum() {
        let baud = 32e9;
        let n_sym = 1 << 13;
        let mut rng = make_prng(8);
        let symbols = RealSequence::new(
            (0..n_sym).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
            baud,
        )
        .unwrap();
        let up = upsample_zero_insert(&symbols, 8).unwrap();
        let shaped = fir_apply(&up, &design_rrc(0.1, 32, 8).unwrap()).unwrap();
        let low = resample(&shaped, 8, 2, 0).unwrap();

        let band_power = |seq: &RealSequence, lo: f64, hi: f64| -> f64 {
            let s = Spectrum::of(&seq.to_complex()).unwrap();
            let n = s.len() as f64;
            (0..s.len())
                .filter(|&k| {
                    let f = s.frequency(k).abs();
                    f >= lo && f < hi
                })
                .map(|k| s.bins()[k].norm_sqr() / n)
                .sum::<f64>()
                / seq.sample_rate()
        };
        let mut lo = 0.0;
        while lo < 16e9 {
            let a = band_power(&shaped, lo, lo + 1e9);
            let b = band_power(&low, lo, lo + 1e9);
            let db = 10.0 * (b / a).log10();
            assert!(db.abs() < 0.1, "band {lo}: {db} dB");
            lo += 1e9;
        }
    }
}
