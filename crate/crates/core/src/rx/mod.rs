//! Receiver-side DSP: matched filtering, hard decisions, BER counting, the
//! LMS feed-forward equalizer and KP4 penalty extraction.

mod ffe;
mod penalty;

pub use ffe::{ffe_apply, ffe_lms_train, FfeState};
pub use penalty::{required_snr, snr_penalty_at_kp4, RequiredSnr, KP4_BER};

use crate::dsp::{design_rrc, fir_apply, RealSequence};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Affine normalization followed by a threshold: a value decides to 1 iff
/// `(v - offset) / scale > threshold`. Ties decide to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub offset: f64,
    pub scale: f64,
    pub threshold: f64,
}

impl DecisionRule {
    /// Fixed threshold on unnormalized values.
    pub fn fixed(threshold: f64) -> Self {
        DecisionRule {
            offset: 0.0,
            scale: 1.0,
            threshold,
        }
    }

    /// Normalizes the class-0 mean to 0 and the class-1 mean to 1 and decides
    /// at 0.5, i.e. at the midpoint of the class-conditional means.
    pub fn fit_midpoint(values: &[f64], bits: &[u8]) -> Result<Self> {
        let (m0, m1) = class_means(values, bits)?;
        let scale = m1 - m0;
        if !(scale.abs() > 0.0) || !scale.is_finite() {
            return Err(Error::param("class means coincide; no decision threshold exists"));
        }
        Ok(DecisionRule {
            offset: m0,
            scale,
            threshold: 0.5,
        })
    }

    /// Threshold (and polarity) minimizing the number of training errors.
    /// Depends only on the ordering of the values, so any strictly monotone
    /// rescaling of the inputs yields the same decisions.
    pub fn fit_min_error(values: &[f64], bits: &[u8]) -> Result<Self> {
        check_pairs(values, bits)?;
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let ones = bits.iter().filter(|&&b| b == 1).count();
        let n = values.len();
        // cut c: the c smallest values decide low, the rest high
        let (mut ones_below, mut best) = (0usize, (usize::MAX, 0usize, 1.0f64));
        for c in 0..=n {
            if c > 0 {
                ones_below += bits[order[c - 1]] as usize;
                if c < n && values[order[c - 1]] == values[order[c]] {
                    continue;
                }
            }
            let zeros_below = c - ones_below;
            let up = ones_below + (n - c - (ones - ones_below));
            let down = zeros_below + (ones - ones_below);
            for (errs, pol) in [(up, 1.0), (down, -1.0)] {
                if errs < best.0 {
                    best = (errs, c, pol);
                }
            }
        }
        let (_, c, polarity) = best;
        // values in the low group sit strictly below the cut, the rest strictly above
        let cut = match c {
            0 => values[order[0]] - 1.0,
            c if c == n => values[order[n - 1]] + 1.0,
            c => 0.5 * (values[order[c - 1]] + values[order[c]]),
        };
        Ok(DecisionRule {
            offset: cut,
            scale: polarity,
            threshold: 0.0,
        })
    }

    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.offset) / self.scale
    }

    pub fn decide(&self, v: f64) -> u8 {
        (self.normalize(v) > self.threshold) as u8
    }

    /// The decision boundary in the unnormalized value domain.
    pub fn raw_threshold(&self) -> f64 {
        self.offset + self.threshold * self.scale
    }
}

fn check_pairs(values: &[f64], bits: &[u8]) -> Result<()> {
    if values.len() != bits.len() {
        return Err(Error::Dimension {
            expected: bits.len(),
            got: values.len(),
        });
    }
    if values.is_empty() {
        return Err(Error::EmptyRequest("no training values for the decision rule"));
    }
    Ok(())
}

fn class_means(values: &[f64], bits: &[u8]) -> Result<(f64, f64)> {
    check_pairs(values, bits)?;
    let (mut s, mut n) = ([0.0; 2], [0usize; 2]);
    for (&v, &b) in values.iter().zip(bits) {
        let c = (b != 0) as usize;
        s[c] += v;
        n[c] += 1;
    }
    if n[0] == 0 || n[1] == 0 {
        return Err(Error::param("training data must contain both symbol classes"));
    }
    Ok((s[0] / n[0] as f64, s[1] / n[1] as f64))
}

/// Class separation `|m1 - m0| / (s0 + s1)`.
pub fn q_factor(values: &[f64], bits: &[u8]) -> Result<f64> {
    let (m0, m1) = class_means(values, bits)?;
    let (mut v, mut n) = ([0.0; 2], [0usize; 2]);
    for (&x, &b) in values.iter().zip(bits) {
        let c = (b != 0) as usize;
        let m = if c == 1 { m1 } else { m0 };
        v[c] += (x - m) * (x - m);
        n[c] += 1;
    }
    let sd = |c: usize| (v[c] / n[c] as f64).sqrt();
    Ok((m1 - m0).abs() / (sd(0) + sd(1)))
}

pub fn hard_decide(values: &[f64], rule: &DecisionRule) -> Vec<u8> {
    values.iter().map(|&v| rule.decide(v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerResult {
    pub errors: usize,
    pub bits_counted: usize,
    pub ber: f64,
    pub fingerprint: String,
}

impl BerResult {
    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.fingerprint = fingerprint.into();
        self
    }
}

/// Bit errors after dropping `guard` symbols at both ends.
pub fn count_ber(decided: &[u8], reference: &[u8], guard: usize) -> Result<BerResult> {
    if decided.len() != reference.len() {
        return Err(Error::Alignment(format!(
            "{} decided bits against {} reference bits",
            decided.len(),
            reference.len()
        )));
    }
    if 2 * guard >= decided.len() {
        return Err(Error::Alignment(format!(
            "guard of {guard} symbols at each end leaves nothing of {} bits",
            decided.len()
        )));
    }
    let region = guard..decided.len() - guard;
    let errors = decided[region.clone()]
        .iter()
        .zip(&reference[region.clone()])
        .filter(|(a, b)| a != b)
        .count();
    let bits_counted = region.len();
    Ok(BerResult {
        errors,
        bits_counted,
        ber: errors as f64 / bits_counted as f64,
        fingerprint: String::new(),
    })
}

/// Symbol-rate output of the matched filter.
#[derive(Debug, Clone)]
pub struct Downsampled {
    pub symbols: RealSequence,
    pub phase: usize,
    pub rule: DecisionRule,
    pub training_errors: usize,
}

/// Where the transmitted bits sit in a sampled waveform and which of them
/// may be used for fitting.
#[derive(Debug, Clone)]
pub struct SymbolTiming<'a> {
    /// Transmitted bits; bit `k` is centered on sample `alignment + k * sps`.
    pub bits: &'a [u8],
    pub alignment: usize,
    /// Symbol indices available for phase search and threshold fitting.
    pub train: Range<usize>,
}

pub fn matched_filter(samples: &RealSequence, sps: usize, rrc_alpha: f64, rrc_span: usize) -> Result<RealSequence> {
    fir_apply(samples, &design_rrc(rrc_alpha, rrc_span, sps)?)
}

/// Picks `alignment + phase + k * sps` for every symbol `k` of `timing.bits`
/// (zero beyond the end of the waveform).
pub fn decimate(samples: &RealSequence, sps: usize, alignment: usize, phase: usize, n_symbols: usize) -> RealSequence {
    let s = samples.samples();
    let values = (0..n_symbols)
        .map(|k| s.get(alignment + phase + k * sps).copied().unwrap_or(0.0))
        .collect();
    RealSequence::from_parts_unchecked(values, samples.sample_rate() / sps as f64)
}

/// RRC matched filter, then decimation at the sampling phase with the fewest
/// training errors (ties go to the larger Q-factor).
pub fn matched_filter_downsample(
    samples: &RealSequence,
    sps: usize,
    rrc_alpha: f64,
    rrc_span: usize,
    timing: &SymbolTiming,
) -> Result<Downsampled> {
    if sps < 2 {
        return Err(Error::param("matched filtering needs at least 2 samples/symbol"));
    }
    let filtered = matched_filter(samples, sps, rrc_alpha, rrc_span)?;
    best_phase(&filtered, sps, timing)
}

/// Phase search on an already filtered waveform.
pub fn best_phase(filtered: &RealSequence, sps: usize, timing: &SymbolTiming) -> Result<Downsampled> {
    let train = timing.train.clone();
    if train.is_empty() || train.end > timing.bits.len() {
        return Err(Error::Alignment(format!(
            "training range {train:?} outside {} bits",
            timing.bits.len()
        )));
    }
    let n = timing.bits.len();
    let mut best: Option<(usize, f64, Downsampled)> = None;
    for phase in 0..sps {
        let symbols = decimate(filtered, sps, timing.alignment, phase, n);
        let tv = &symbols.samples()[train.clone()];
        let tb = &timing.bits[train.clone()];
        let Ok(rule) = DecisionRule::fit_midpoint(tv, tb) else {
            continue;
        };
        let errors = tv.iter().zip(tb).filter(|(&v, &b)| rule.decide(v) != b).count();
        let q = q_factor(tv, tb)?;
        let better = match &best {
            None => true,
            Some((e, bq, _)) => errors < *e || (errors == *e && q > *bq),
        };
        if better {
            best = Some((
                errors,
                q,
                Downsampled {
                    symbols,
                    phase,
                    rule,
                    training_errors: errors,
                },
            ));
        }
    }
    best.map(|b| b.2)
        .ok_or_else(|| Error::param("no sampling phase separates the two symbol classes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{generate_bits, make_prng};
    use crate::link::{simulate_link, LinkConfig};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn fixed_threshold_and_ties() {
        assert_eq!(hard_decide(&[0.1, 0.9], &DecisionRule::fixed(0.5)), vec![0, 1]);
        assert_eq!(hard_decide(&[0.5; 4], &DecisionRule::fixed(0.5)), vec![0; 4]);
    }

    #[test]
    fn midpoint_rule_on_gaussian_clusters() {
        let mut rng = make_prng(5);
        let (m0, m1, sd) = (0.2, 1.4, 0.15);
        let n0 = Normal::new(m0, sd).unwrap();
        let n1 = Normal::new(m1, sd).unwrap();
        let bits = generate_bits(&mut rng, 20_000).unwrap();
        let values: Vec<f64> = bits
            .iter()
            .map(|&b| if b == 1 { n1.sample(&mut rng) } else { n0.sample(&mut rng) })
            .collect();
        let rule = DecisionRule::fit_midpoint(&values, &bits).unwrap();
        let mid = 0.5 * (m0 + m1);
        assert!((rule.raw_threshold() - mid).abs() < 0.05 * mid);
        assert!((rule.normalize(m0)).abs() < 0.02);
        assert!((rule.normalize(m1) - 1.0).abs() < 0.02);
        let inverted: Vec<f64> = values.iter().map(|v| -v).collect();
        let r2 = DecisionRule::fit_midpoint(&inverted, &bits).unwrap();
        assert_eq!(hard_decide(&inverted, &r2), hard_decide(&values, &rule));
        assert!(DecisionRule::fit_midpoint(&values, &vec![1; values.len()]).is_err());
    }

    #[test]
    fn min_error_rule_separates_clean_data() {
        let v = [0.1, 0.2, 0.25, 0.8, 0.9];
        let b = [0, 0, 0, 1, 1];
        let r = DecisionRule::fit_min_error(&v, &b).unwrap();
        assert_eq!(hard_decide(&v, &r), b.to_vec());
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let r = DecisionRule::fit_min_error(&neg, &b).unwrap();
        assert_eq!(hard_decide(&neg, &r), b.to_vec());
    }

    proptest! {
        #[test]
        fn min_error_ber_is_invariant_under_monotone_maps(
            seed in 0u64..10_000,
            n in 20usize..300,
            a in 0.1f64..5.0,
            c in -3.0f64..3.0,
            kind in 0usize..4,
        ) {
            let mut rng = make_prng(seed);
            let bits = generate_bits(&mut rng, n).unwrap();
            let values: Vec<f64> = bits.iter().map(|&b| b as f64 + 0.6 * (rng.random::<f64>() - 0.5)).collect();
            let map = |v: f64| match kind {
                0 => a * v + c,
                1 => (a * v).exp(),
                2 => -(a * v) + c,
                _ => (a * v).powi(3) + c,
            };
            let mapped: Vec<f64> = values.iter().map(|&v| map(v)).collect();
            let r0 = DecisionRule::fit_min_error(&values, &bits).unwrap();
            let r1 = DecisionRule::fit_min_error(&mapped, &bits).unwrap();
            let e0 = count_ber(&hard_decide(&values, &r0), &bits, 0).unwrap().errors;
            let e1 = count_ber(&hard_decide(&mapped, &r1), &bits, 0).unwrap().errors;
            prop_assert_eq!(e0, e1);
        }
    }

    #[test]
    fn ber_counting() {
        let bits = generate_bits(&mut make_prng(1), 10_000).unwrap();
        assert_eq!(count_ber(&bits, &bits, 0).unwrap().ber, 0.0);
        let inv: Vec<u8> = bits.iter().map(|b| 1 - b).collect();
        assert_eq!(count_ber(&inv, &bits, 0).unwrap().ber, 1.0);
        let mut flipped = bits.clone();
        for i in [150, 2000, 5000, 7777, 9800] {
            flipped[i] ^= 1;
        }
        // flips at index < guard and >= len - guard are not counted
        flipped[10] ^= 1;
        flipped[9950] ^= 1;
        let r = count_ber(&flipped, &bits, 100).unwrap();
        assert_eq!(r.errors, 5);
        assert_eq!(r.bits_counted, 9800);
        assert_eq!(r.ber, 5.0 / 9800.0);
        assert!(matches!(count_ber(&bits[1..], &bits, 0), Err(Error::Alignment(_))));
        assert!(count_ber(&bits, &bits, 5000).is_err());
    }

    fn b2b_single_pd(n: usize) -> (Vec<u8>, RealSequence, LinkConfig) {
        let cfg = LinkConfig::default().single_pd();
        let bits = generate_bits(&mut make_prng(21), n).unwrap();
        let s = simulate_link(&bits, &cfg, &mut make_prng(22)).unwrap();
        (bits, s.slices()[0].clone(), cfg)
    }

    #[test]
    fn noiseless_b2b_is_error_free_and_bimodal() {
        let (bits, pd, cfg) = b2b_single_pd(4096);
        let timing = SymbolTiming {
            bits: &bits,
            alignment: 0,
            train: 200..2000,
        };
        let ds = matched_filter_downsample(&pd, cfg.sim_sps, cfg.rrc_alpha, cfg.rrc_span, &timing).unwrap();
        assert!(ds.phase < 8);
        assert_eq!(ds.phase, 0);
        let decided = hard_decide(ds.symbols.samples(), &ds.rule);
        assert_eq!(count_ber(&decided, &bits, 200).unwrap().errors, 0);
        let inner = &ds.symbols.samples()[200..3800];
        let (mut hi0, mut lo1) = (f64::MIN, f64::MAX);
        for (&v, &b) in inner.iter().zip(&bits[200..3800]) {
            if b == 1 {
                lo1 = lo1.min(v);
            } else {
                hi0 = hi0.max(v);
            }
        }
        assert!(hi0 < ds.rule.raw_threshold() && ds.rule.raw_threshold() < lo1);
    }

    #[test]
    fn phase_search_absorbs_sample_offset() {
        let (bits, pd, cfg) = b2b_single_pd(4096);
        let mut shifted = vec![0.0; 3];
        shifted.extend_from_slice(&pd.samples()[..pd.len() - 3]);
        let shifted = RealSequence::new(shifted, pd.sample_rate()).unwrap();
        let timing = SymbolTiming {
            bits: &bits,
            alignment: 0,
            train: 200..2000,
        };
        let a = matched_filter_downsample(&pd, 8, cfg.rrc_alpha, cfg.rrc_span, &timing).unwrap();
        let b = matched_filter_downsample(&shifted, 8, cfg.rrc_alpha, cfg.rrc_span, &timing).unwrap();
        assert_eq!(b.phase, (a.phase + 3) % 8);
        let ea = count_ber(&hard_decide(a.symbols.samples(), &a.rule), &bits, 200).unwrap();
        let eb = count_ber(&hard_decide(b.symbols.samples(), &b.rule), &bits, 200).unwrap();
        assert_eq!(ea.errors, eb.errors);
    }

    #[test]
    fn unequalized_74_km_is_broken() {
        let cfg = LinkConfig {
            fiber_length_km: 74.0,
            ..LinkConfig::default()
        }
        .single_pd();
        let bits = generate_bits(&mut make_prng(31), 8192).unwrap();
        let s = simulate_link(&bits, &cfg, &mut make_prng(32)).unwrap();
        let timing = SymbolTiming {
            bits: &bits,
            alignment: 0,
            train: 200..4000,
        };
        let ds = matched_filter_downsample(&s.slices()[0], 8, cfg.rrc_alpha, cfg.rrc_span, &timing).unwrap();
        let r = count_ber(&hard_decide(ds.symbols.samples(), &ds.rule), &bits, 200).unwrap();
        assert!(r.ber > 1e-2, "ber {}", r.ber);
    }

    #[test]
    fn short_oversampling_is_rejected() {
        let (bits, pd, _) = b2b_single_pd(64);
        let timing = SymbolTiming {
            bits: &bits,
            alignment: 0,
            train: 0..64,
        };
        assert!(matched_filter_downsample(&pd, 1, 0.1, 64, &timing).is_err());
    }
}
