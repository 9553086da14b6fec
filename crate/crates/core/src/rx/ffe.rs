//! Symbol-spaced linear feed-forward equalizer adapted by LMS.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfeState {
    pub taps: Vec<f64>,
    pub step_size: f64,
}

impl FfeState {
    /// All-zero taps.
    pub fn new(n_taps: usize, step_size: f64) -> Result<Self> {
        if n_taps == 0 || n_taps % 2 == 0 {
            return Err(Error::param(format!("FFE needs an odd tap count, got {n_taps}")));
        }
        if !(step_size >= 0.0) || !step_size.is_finite() {
            return Err(Error::param(format!("step size must be >= 0, got {step_size}")));
        }
        Ok(FfeState {
            taps: vec![0.0; n_taps],
            step_size,
        })
    }

    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    fn center(&self) -> usize {
        self.taps.len() / 2
    }

    /// Output at symbol `k`; inputs outside the sequence count as zero.
    fn output(&self, x: &[f64], k: usize) -> f64 {
        let c = self.center();
        self.taps
            .iter()
            .enumerate()
            .filter_map(|(i, w)| (k + i).checked_sub(c).and_then(|j| x.get(j)).map(|v| w * v))
            .sum()
    }
}

/// One LMS pass over `n_train` symbols starting at `start`:
/// `w <- w + mu * e_k * x_k` with `e_k = d_k - w . x_k`.
pub fn ffe_lms_train(x: &[f64], reference: &[f64], mut state: FfeState, start: usize, n_train: usize) -> Result<FfeState> {
    if x.len() != reference.len() {
        return Err(Error::Dimension {
            expected: reference.len(),
            got: x.len(),
        });
    }
    if start + n_train > x.len() {
        return Err(Error::Alignment(format!(
            "{n_train} training symbols from {start} exceed {} available",
            x.len()
        )));
    }
    let c = state.center();
    let mu = state.step_size;
    for (it, k) in (start..start + n_train).enumerate() {
        let e = reference[k] - state.output(x, k);
        for (i, w) in state.taps.iter_mut().enumerate() {
            if let Some(v) = (k + i).checked_sub(c).and_then(|j| x.get(j)) {
                *w += mu * e * v;
            }
        }
        if state.taps.iter().any(|w| !(w.abs() <= DIVERGENCE_LIMIT)) {
            return Err(Error::StepSize {
                iterations: it + 1,
                step_size: mu,
            });
        }
    }
    Ok(state)
}

pub fn ffe_apply(x: &[f64], state: &FfeState) -> Vec<f64> {
    (0..x.len()).map(|k| state.output(x, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{generate_bits, make_prng};
    use crate::rx::{count_ber, hard_decide, DecisionRule};
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn pm1(seed: u64, n: usize) -> Vec<f64> {
        generate_bits(&mut make_prng(seed), n)
            .unwrap()
            .iter()
            .map(|&b| 2.0 * b as f64 - 1.0)
            .collect()
    }

    #[test]
    fn rejects_even_taps_and_bad_step() {
        assert!(FfeState::new(10, 1e-3).is_err());
        assert!(FfeState::new(11, -1.0).is_err());
        assert!(FfeState::new(11, f64::NAN).is_err());
    }

    #[test]
    fn identity_channel_converges_to_center_spike() {
        let x = pm1(1, 60_000);
        let s = ffe_lms_train(&x, &x, FfeState::new(11, 0.01).unwrap(), 0, 50_000).unwrap();
        assert!((s.taps[5] - 1.0).abs() < 1e-3, "{:?}", s.taps);
        for (i, w) in s.taps.iter().enumerate() {
            if i != 5 {
                assert!(w.abs() < 0.05);
            }
        }
    }

    #[test]
    fn zero_step_leaves_taps_alone() {
        let x = pm1(2, 1000);
        let mut init = FfeState::new(11, 0.0).unwrap();
        init.taps[3] = 0.25;
        let s = ffe_lms_train(&x, &x, init.clone(), 0, 1000).unwrap();
        assert_eq!(s, init);
    }

    #[test]
    fn tap_error_shrinks_in_expectation() {
        // averaged over 10 seeds, distance to the ideal taps decreases
        let checkpoints = [200, 800, 3200];
        let mut mean = [0.0; 3];
        for seed in 0..10 {
            let x = pm1(100 + seed, 4000);
            let noise = Normal::new(0.0, 0.3).unwrap();
            let mut rng = make_prng(200 + seed);
            let d: Vec<f64> = x.iter().map(|v| v + noise.sample(&mut rng)).collect();
            for (slot, &n) in checkpoints.iter().enumerate() {
                let s = ffe_lms_train(&x, &d, FfeState::new(11, 2e-3).unwrap(), 0, n).unwrap();
                let err: f64 = s
                    .taps
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (w - if i == 5 { 1.0 } else { 0.0 }).powi(2))
                    .sum();
                mean[slot] += err / 10.0;
            }
        }
        assert!(mean[0] > mean[1] && mean[1] > mean[2], "{mean:?}");
    }

    #[test]
    fn equalizes_three_tap_isi() {
        let n = 80_000;
        let bits = generate_bits(&mut make_prng(7), n).unwrap();
        let x: Vec<f64> = bits.iter().map(|&b| 2.0 * b as f64 - 1.0).collect();
        let h = [0.45, 1.0, 0.55];
        let noise = Normal::new(0.0, 0.12).unwrap();
        let mut rng = make_prng(8);
        let y: Vec<f64> = (0..n)
            .map(|k| {
                let mut v = h[1] * x[k] + noise.sample(&mut rng);
                if k > 0 {
                    v += h[0] * x[k - 1];
                }
                if k + 1 < n {
                    v += h[2] * x[k + 1];
                }
                v
            })
            .collect();
        let raw = count_ber(&hard_decide(&y, &DecisionRule::fixed(0.0)), &bits, 100).unwrap();
        let s = ffe_lms_train(&y, &x, FfeState::new(11, 1e-3).unwrap(), 0, 50_000).unwrap();
        let eq = ffe_apply(&y, &s);
        let equalized = count_ber(&hard_decide(&eq, &DecisionRule::fixed(0.0)), &bits, 100).unwrap();
        assert!(raw.ber > 1e-2, "raw {}", raw.ber);
        assert!(equalized.ber < raw.ber / 2.0, "eq {} raw {}", equalized.ber, raw.ber);
    }

    #[test]
    fn large_step_reports_divergence() {
        let mut rng = make_prng(3);
        let x: Vec<f64> = (0..5000).map(|_| 10.0 * (rng.random::<f64>() - 0.5)).collect();
        let r = ffe_lms_train(&x, &x, FfeState::new(11, 1.0).unwrap(), 0, 5000);
        assert!(matches!(r, Err(Error::StepSize { .. })));
    }
}
