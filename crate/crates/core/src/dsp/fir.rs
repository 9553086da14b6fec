//! FIR design and time-domain filtering.

use super::{RealSequence, SampleSequence};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Real FIR taps plus a human-readable tag.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
    description: String,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>, description: impl Into<String>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::param("filter needs at least one tap"));
        }
        let energy: f64 = taps.iter().map(|t| t * t).sum();
        if !energy.is_finite() || energy <= 0.0 {
            return Err(Error::param(format!("filter energy must be finite and positive, got {energy}")));
        }
        Ok(FirFilter {
            taps,
            description: description.into(),
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Root-raised-cosine taps at `t = n / sps` symbol periods, unit energy.
pub fn design_rrc(alpha: f64, span_symbols: usize, sps: usize) -> Result<FirFilter> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("RRC roll-off must be in (0, 1], got {alpha}")));
    }
    if span_symbols == 0 || span_symbols % 2 != 0 {
        return Err(Error::param(format!("RRC span must be a positive even symbol count, got {span_symbols}")));
    }
    if sps == 0 {
        return Err(Error::param("RRC needs at least one sample per symbol"));
    }
    let n_taps = span_symbols * sps + 1;
    let center = (n_taps / 2) as f64;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|n| rrc_impulse((n as f64 - center) / sps as f64, alpha))
        .collect();
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= norm);
    FirFilter::new(
        taps,
        format!("rrc alpha={alpha} span={span_symbols} sps={sps}"),
    )
}

fn rrc_impulse(t: f64, alpha: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - alpha + 4.0 * alpha / PI;
    }
    let singular = 1.0 / (4.0 * alpha);
    if (t.abs() - singular).abs() < 1e-9 {
        let a = PI / (4.0 * alpha);
        return alpha / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - alpha)).sin() + 4.0 * alpha * t * (PI * t * (1.0 + alpha)).cos();
    let den = PI * t * (1.0 - (4.0 * alpha * t).powi(2));
    num / den
}

/// Blackman-windowed sinc low-pass with unit DC gain. `cutoff` is a fraction of
/// the sample rate and must lie in (0, 0.5).
pub fn design_lowpass(cutoff: f64, n_taps: usize) -> Result<FirFilter> {
    if !(cutoff > 0.0 && cutoff < 0.5) {
        return Err(Error::param(format!("low-pass cutoff must be in (0, 0.5) of fs, got {cutoff}")));
    }
    if n_taps % 2 == 0 {
        return Err(Error::param("low-pass length must be odd"));
    }
    let mid = (n_taps / 2) as f64;
    let last = (n_taps - 1).max(1) as f64;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|n| {
            let x = n as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * x).sin() / (PI * x)
            };
            let w = 0.42 - 0.5 * (2.0 * PI * n as f64 / last).cos()
                + 0.08 * (4.0 * PI * n as f64 / last).cos();
            sinc * w
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    FirFilter::new(taps, format!("blackman lowpass cutoff={cutoff} taps={n_taps}"))
}

/// Linear convolution in "same" mode: the output has the input length and the
/// filter's center tap lines up with the input sample, so symmetric filters add
/// no delay. Samples beyond either edge are treated as zero.
pub fn fir_apply<S: SampleSequence>(signal: &S, filter: &FirFilter) -> Result<S> {
    let x = signal.samples();
    if x.is_empty() {
        return Err(Error::EmptyRequest("cannot filter an empty signal"));
    }
    let k = filter.taps.len();
    let n = x.len();
    if k >= FFT_MIN_TAPS && n >= 4 * k {
        return Ok(S::with_samples(fft_convolve_same(x, &filter.taps), signal.sample_rate()));
    }
    // out[i] = sum_j rev[j] * x[i - lead + j]
    let rev: Vec<f64> = filter.taps.iter().rev().copied().collect();
    let lead = k - 1 - (k - 1) / 2;
    let mut out = vec![S::Sample::default(); n];
    for (i, o) in out.iter_mut().enumerate() {
        let j_lo = lead.saturating_sub(i);
        let j_hi = k.min(n + lead - i);
        let base = i + j_lo - lead;
        let mut acc = S::Sample::default();
        for (&h, &v) in rev[j_lo..j_hi].iter().zip(&x[base..base + (j_hi - j_lo)]) {
            acc = acc + v * h;
        }
        *o = acc;
    }
    Ok(S::with_samples(out, signal.sample_rate()))
}

const FFT_MIN_TAPS: usize = 64;

fn fft_convolve_same<T>(x: &[T], taps: &[f64]) -> Vec<T>
where
    T: Copy + Into<Complex64> + FromComplex,
{
    let k = taps.len();
    let len = (x.len() + k - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut a: Vec<Complex64> = x.iter().map(|&v| v.into()).collect();
    a.resize(len, Complex64::default());
    let mut b: Vec<Complex64> = taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    b.resize(len, Complex64::default());
    fwd.process(&mut a);
    fwd.process(&mut b);
    let scale = 1.0 / len as f64;
    for (u, v) in a.iter_mut().zip(&b) {
        *u = *u * v * scale;
    }
    inv.process(&mut a);
    let offset = (k - 1) / 2;
    a[offset..offset + x.len()]
        .iter()
        .map(|&c| T::from_complex(c))
        .collect()
}

/// Conversion back from a complex FFT result.
pub trait FromComplex {
    fn from_complex(c: Complex64) -> Self;
}

impl FromComplex for f64 {
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
}

impl FromComplex for Complex64 {
    fn from_complex(c: Complex64) -> Self {
        c
    }
}

/// Inserts `sps - 1` zeros after every input value.
pub fn upsample_zero_insert(symbols: &RealSequence, sps: usize) -> Result<RealSequence> {
    if sps == 0 {
        return Err(Error::param("upsampling factor must be at least 1"));
    }
    let mut out = vec![0.0; symbols.len() * sps];
    for (i, &v) in symbols.samples().iter().enumerate() {
        out[i * sps] = v;
    }
    Ok(RealSequence::from_parts_unchecked(
        out,
        symbols.sample_rate() * sps as f64,
    ))
}

/// Integer-ratio decimation from `from_sps` to `to_sps` samples per symbol.
/// An anti-alias low-pass runs first; `phase` picks which of the
/// `from_sps / to_sps` input samples starts the output grid.
pub fn resample(
    signal: &RealSequence,
    from_sps: usize,
    to_sps: usize,
    phase: usize,
) -> Result<RealSequence> {
    if to_sps == 0 || from_sps < to_sps || from_sps % to_sps != 0 {
        return Err(Error::UnsupportedRatio {
            from: from_sps,
            to: to_sps,
        });
    }
    let factor = from_sps / to_sps;
    if phase >= factor {
        return Err(Error::param(format!("phase {phase} must be below the decimation factor {factor}")));
    }
    if factor == 1 {
        return Ok(signal.clone());
    }
    let lpf = design_lowpass(0.85 * 0.5 / factor as f64, 32 * factor + 1)?;
    let filtered = fir_apply(signal, &lpf)?;
    let out: Vec<f64> = filtered
        .samples()
        .iter()
        .skip(phase)
        .step_by(factor)
        .copied()
        .collect();
    Ok(RealSequence::from_parts_unchecked(
        out,
        signal.sample_rate() / factor as f64,
    ))
}
