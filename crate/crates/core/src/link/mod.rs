//! End-to-end channel: OOK transmitter, chromatic dispersion, receiver noise,
//! spectral slicing and square-law detection.

mod io;

pub use io::{read_bits, read_sliced, write_bits, write_sliced};

use crate::dsp::{
    design_rrc, fir_apply, super_gaussian_gain, upsample_zero_insert, ComplexSequence, Mt19937,
    RealSequence, Spectrum,
};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Electro-optic transfer of the modulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MzmModel {
    /// Quadrature-biased Mach-Zehnder: `E = sin(pi/2 * v)`, power 1/2 at `v = 1/2`.
    QuadratureCosine,
    /// `E = sqrt(max(v, 0))`, i.e. optical power follows the drive exactly.
    IdealSqrtField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub baud_rate: f64,
    pub sim_sps: usize,
    pub rrc_alpha: f64,
    pub rrc_span: usize,
    pub fiber_length_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub wavelength_nm: f64,
    pub n_slices: usize,
    pub slice_3db_bw_ghz: f64,
    pub slice_spacing_ghz: f64,
    pub slice_filter_order: u32,
    /// Optical filter in front of the single-photodiode reference receiver.
    pub reference_bw_ghz: f64,
    /// `inf` disables the noise source.
    pub snr_db: f64,
    pub mzm_model: MzmModel,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            baud_rate: 32e9,
            sim_sps: 8,
            rrc_alpha: 0.1,
            rrc_span: 64,
            fiber_length_km: 0.0,
            dispersion_ps_nm_km: 16.4,
            wavelength_nm: 1550.0,
            n_slices: 4,
            slice_3db_bw_ghz: 16.0,
            slice_spacing_ghz: 8.0,
            slice_filter_order: 2,
            reference_bw_ghz: 64.0,
            snr_db: f64::INFINITY,
            mzm_model: MzmModel::QuadratureCosine,
        }
    }
}

impl LinkConfig {
    pub fn sample_rate(&self) -> f64 {
        self.baud_rate * self.sim_sps as f64
    }

    /// Slice center frequencies in Hz, symmetric around zero.
    pub fn slice_centers(&self) -> Vec<f64> {
        let mid = (self.n_slices as f64 - 1.0) / 2.0;
        (0..self.n_slices)
            .map(|i| (i as f64 - mid) * self.slice_spacing_ghz * 1e9)
            .collect()
    }

    /// The same link seen by one wideband photodiode without slicing.
    pub fn single_pd(&self) -> LinkConfig {
        LinkConfig {
            n_slices: 1,
            slice_3db_bw_ghz: self.reference_bw_ghz,
            ..self.clone()
        }
    }

    /// Group-velocity dispersion `beta2` in s^2/m (negative for standard fiber).
    pub fn beta2(&self) -> f64 {
        let d = self.dispersion_ps_nm_km * 1e-6;
        let lambda = self.wavelength_nm * 1e-9;
        -d * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.baud_rate > 0.0) || self.sim_sps == 0 {
            return Err(Error::config("baud rate and samples/symbol must be positive"));
        }
        if self.n_slices == 0 {
            return Err(Error::config("at least one slice is required"));
        }
        if !(self.fiber_length_km >= 0.0) {
            return Err(Error::config(format!("fiber length must be >= 0, got {}", self.fiber_length_km)));
        }
        if !(self.rrc_alpha > 0.0 && self.rrc_alpha <= 1.0) || self.rrc_span % 2 != 0 || self.rrc_span == 0 {
            return Err(Error::config("RRC roll-off must be in (0, 1] and span a positive even count"));
        }
        if !(self.slice_3db_bw_ghz > 0.0) || !(self.reference_bw_ghz > 0.0) || self.slice_filter_order == 0 {
            return Err(Error::config("slice filters need positive bandwidth and order"));
        }
        if self.snr_db.is_nan() {
            return Err(Error::config("SNR must be a number or inf"));
        }
        self.check_slice_band()
    }

    fn check_slice_band(&self) -> Result<()> {
        let nyquist = self.sample_rate() / 2.0;
        let half_bw = self.slice_3db_bw_ghz * 1e9 / 2.0;
        let outer = self
            .slice_centers()
            .iter()
            .map(|f| f.abs() + half_bw)
            .fold(0.0, f64::max);
        let signal_edge = self.baud_rate * (1.0 + self.rrc_alpha) / 2.0;
        if outer >= nyquist || signal_edge >= nyquist {
            return Err(Error::config(format!(
                "sliced band reaches {:.1} GHz, beyond the {:.1} GHz simulation Nyquist limit",
                outer / 1e9,
                nyquist / 1e9
            )));
        }
        Ok(())
    }
}

/// Parallel photodetector outputs on one time base.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicedSignal {
    slices: Vec<RealSequence>,
    sps: usize,
    symbol_alignment: usize,
}

impl SlicedSignal {
    /// `symbol_alignment` is the sample index holding the center of symbol 0.
    pub fn new(slices: Vec<RealSequence>, sps: usize, symbol_alignment: usize) -> Result<Self> {
        let first = slices
            .first()
            .ok_or(Error::EmptyRequest("a sliced signal needs at least one slice"))?;
        if sps == 0 {
            return Err(Error::param("samples/symbol must be positive"));
        }
        let (len, rate) = (first.len(), first.sample_rate());
        if slices.iter().any(|s| s.len() != len || s.sample_rate() != rate) {
            return Err(Error::param("all slices must share length and sample rate"));
        }
        Ok(SlicedSignal {
            slices,
            sps,
            symbol_alignment,
        })
    }

    pub fn slices(&self) -> &[RealSequence] {
        &self.slices
    }

    pub fn n_slices(&self) -> usize {
        self.slices.len()
    }

    pub fn len(&self) -> usize {
        self.slices[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sps(&self) -> usize {
        self.sps
    }

    pub fn sample_rate(&self) -> f64 {
        self.slices[0].sample_rate()
    }

    pub fn symbol_alignment(&self) -> usize {
        self.symbol_alignment
    }

    /// Resamples every slice to `to_sps` samples per symbol.
    pub fn resampled(&self, to_sps: usize) -> Result<SlicedSignal> {
        if to_sps == self.sps {
            return Ok(self.clone());
        }
        if to_sps == 0 || self.sps % to_sps != 0 {
            return Err(Error::UnsupportedRatio {
                from: self.sps,
                to: to_sps,
            });
        }
        let factor = self.sps / to_sps;
        let phase = self.symbol_alignment % factor;
        let slices = self
            .slices
            .iter()
            .map(|s| crate::dsp::resample(s, self.sps, to_sps, phase))
            .collect::<Result<Vec<_>>>()?;
        SlicedSignal::new(slices, to_sps, self.symbol_alignment / factor)
    }

    /// Same signal with the slice order permuted: output slice `i` is input
    /// slice `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<SlicedSignal> {
        if order.len() != self.n_slices() {
            return Err(Error::Dimension {
                expected: self.n_slices(),
                got: order.len(),
            });
        }
        let slices = order
            .iter()
            .map(|&i| {
                self.slices
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::param(format!("slice {i} does not exist")))
            })
            .collect::<Result<Vec<_>>>()?;
        SlicedSignal::new(slices, self.sps, self.symbol_alignment)
    }

    /// Sample-major interleaving: `[s0[0], s1[0], .., s0[1], s1[1], ..]`.
    pub fn interleaved(&self) -> Vec<f64> {
        let n = self.n_slices();
        let mut out = vec![0.0; self.len() * n];
        for (j, s) in self.slices.iter().enumerate() {
            for (i, &v) in s.samples().iter().enumerate() {
                out[i * n + j] = v;
            }
        }
        out
    }
}

fn symbols_to_drive(bits: &[u8], cfg: &LinkConfig) -> Result<RealSequence> {
    let symbols = RealSequence::new(bits.iter().map(|&b| b as f64).collect(), cfg.baud_rate)?;
    let up = upsample_zero_insert(&symbols, cfg.sim_sps)?;
    let rrc = design_rrc(cfg.rrc_alpha, cfg.rrc_span, cfg.sim_sps)?;
    // steady-state level of an all-ones input at a symbol instant
    let center = rrc.len() / 2;
    let dc: f64 = rrc
        .taps()
        .iter()
        .enumerate()
        .filter(|(i, _)| i.abs_diff(center) % cfg.sim_sps == 0)
        .map(|(_, t)| t)
        .sum();
    let shaped = fir_apply(&up, &rrc)?;
    Ok(RealSequence::from_parts_unchecked(
        shaped.samples().iter().map(|v| v / dc).collect(),
        shaped.sample_rate(),
    ))
}

/// RRC-shaped electrical drive, scaled so the nominal OOK levels are 0 and 1.
pub fn transmit_drive(bits: &[u8], cfg: &LinkConfig) -> Result<RealSequence> {
    if bits.is_empty() {
        return Err(Error::EmptyRequest("no bits to transmit"));
    }
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::param(format!("bits must be 0 or 1, found {b}")));
    }
    symbols_to_drive(bits, cfg)
}

/// Optical field at the fiber input.
pub fn modulate(drive: &RealSequence, model: MzmModel) -> ComplexSequence {
    let field = drive
        .samples()
        .iter()
        .map(|&v| {
            let e = match model {
                MzmModel::QuadratureCosine => (PI / 2.0 * v).sin(),
                MzmModel::IdealSqrtField => v.max(0.0).sqrt(),
            };
            Complex64::new(e, 0.0)
        })
        .collect();
    ComplexSequence::from_parts_unchecked(field, drive.sample_rate())
}

/// OOK bits to optical field: zero-insert, RRC shaping, modulator.
pub fn transmit(bits: &[u8], cfg: &LinkConfig) -> Result<ComplexSequence> {
    Ok(modulate(&transmit_drive(bits, cfg)?, cfg.mzm_model))
}

/// All-pass quadratic-phase fiber response
/// `H(f) = exp(j pi D lambda^2 / c L f^2)`.
pub fn cd_transfer(cfg: &LinkConfig) -> impl Fn(f64) -> Complex64 {
    let d = cfg.dispersion_ps_nm_km * 1e-6;
    let lambda = cfg.wavelength_nm * 1e-9;
    let length = cfg.fiber_length_km * 1e3;
    let k = PI * d * lambda * lambda / SPEED_OF_LIGHT * length;
    move |f| Complex64::from_polar(1.0, k * f * f)
}

pub fn apply_cd(field: &ComplexSequence, cfg: &LinkConfig) -> Result<ComplexSequence> {
    if !(cfg.fiber_length_km >= 0.0) {
        return Err(Error::config("fiber length must be >= 0"));
    }
    if cfg.fiber_length_km == 0.0 {
        return Ok(field.clone());
    }
    crate::dsp::dft_filter(field, cd_transfer(cfg))
}

/// Adds circularly-symmetric complex Gaussian noise whose total variance is
/// the mean signal power divided by the linear SNR.
pub fn add_awgn(field: &ComplexSequence, snr_db: f64, prng: &mut Mt19937) -> Result<ComplexSequence> {
    if field.is_empty() {
        return Err(Error::EmptyRequest("cannot add noise to an empty signal"));
    }
    if snr_db == f64::INFINITY {
        return Ok(field.clone());
    }
    if snr_db.is_nan() {
        return Err(Error::param("SNR is NaN"));
    }
    let variance = field.mean_power() / 10f64.powf(snr_db / 10.0);
    let sigma = (variance / 2.0).sqrt();
    let noisy = field
        .samples()
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(prng);
            let im: f64 = StandardNormal.sample(prng);
            s + Complex64::new(re * sigma, im * sigma)
        })
        .collect();
    Ok(ComplexSequence::from_parts_unchecked(noisy, field.sample_rate()))
}

fn detect_from_spectrum(spectrum: &Spectrum, cfg: &LinkConfig) -> Result<SlicedSignal> {
    let bw = cfg.slice_3db_bw_ghz * 1e9;
    let slices = cfg
        .slice_centers()
        .into_iter()
        .map(|fc| {
            spectrum
                .filtered(|f| Complex64::new(super_gaussian_gain(f, fc, bw, cfg.slice_filter_order), 0.0))
                .intensity()
        })
        .collect();
    SlicedSignal::new(slices, cfg.sim_sps, 0)
}

/// Super-Gaussian band-pass per slice (zero phase), then square-law detection.
pub fn slice_and_detect(field: &ComplexSequence, cfg: &LinkConfig) -> Result<SlicedSignal> {
    cfg.check_slice_band()?;
    detect_from_spectrum(&Spectrum::of(field)?, cfg)
}

/// Everything the receivers need from one channel realization.
#[derive(Debug, Clone)]
pub struct LinkRun {
    /// Normalized transmitter drive at the simulation rate.
    pub drive: RealSequence,
    pub sliced: SlicedSignal,
    /// The same noisy field detected by one wideband photodiode.
    pub single_pd: SlicedSignal,
}

/// Runs the full chain once and detects the received field with both the
/// sliced receiver and the single-photodiode reference.
pub fn run_link(bits: &[u8], cfg: &LinkConfig, prng: &mut Mt19937) -> Result<LinkRun> {
    cfg.validate()?;
    let drive = transmit_drive(bits, cfg)?;
    let field = modulate(&drive, cfg.mzm_model);
    let field = apply_cd(&field, cfg)?;
    let field = add_awgn(&field, cfg.snr_db, prng)?;
    let spectrum = Spectrum::of(&field)?;
    let sliced = detect_from_spectrum(&spectrum, cfg)?;
    let single_pd = detect_from_spectrum(&spectrum, &cfg.single_pd())?;
    Ok(LinkRun {
        drive,
        sliced,
        single_pd,
    })
}

/// transmit -> fiber -> noise -> slicing/detection. Sample `k * sim_sps` of the
/// result carries bit `k`.
pub fn simulate_link(bits: &[u8], cfg: &LinkConfig, prng: &mut Mt19937) -> Result<SlicedSignal> {
    cfg.validate()?;
    let field = transmit(bits, cfg)?;
    let field = apply_cd(&field, cfg)?;
    let field = add_awgn(&field, cfg.snr_db, prng)?;
    slice_and_detect(&field, cfg)
}
