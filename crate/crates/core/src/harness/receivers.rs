//! Receivers evaluated at a sweep point.

use super::config::{Layout, FFE, UNEQUALIZED};
use crate::dsp::{generate_bits, make_prng};
use crate::error::{Error, Result};
use crate::link::{run_link, LinkConfig, LinkRun};
use crate::nn::{train, EqualizerSpec, FramingMode, LinkCapture, TrainedModel};
use crate::rx::{
    count_ber, ffe_apply, ffe_lms_train, hard_decide, matched_filter_downsample, BerResult, DecisionRule,
    Downsampled, FfeState, SymbolTiming,
};

/// One channel realization shared by every receiver at a point.
#[derive(Debug, Clone)]
pub struct Channel {
    pub link: LinkConfig,
    pub bits: Vec<u8>,
    pub run: LinkRun,
}

impl Channel {
    pub fn simulate(link: &LinkConfig, n_symbols: usize, bits_seed: u64, noise_seed: u64) -> Result<Self> {
        let bits = generate_bits(&mut make_prng(bits_seed), n_symbols)?;
        let run = run_link(&bits, link, &mut make_prng(noise_seed))?;
        Ok(Channel {
            link: link.clone(),
            bits,
            run,
        })
    }

    pub fn capture(&self) -> LinkCapture<'_> {
        LinkCapture {
            sliced: &self.run.sliced,
            drive: &self.run.drive,
            bits: &self.bits,
            rrc_alpha: self.link.rrc_alpha,
            rrc_span: self.link.rrc_span,
        }
    }

    /// Single-photodiode signal after the matched filter, at the best phase
    /// over the training symbols.
    fn single_pd_symbols(&self, layout: &Layout) -> Result<Downsampled> {
        let pd = &self.run.single_pd;
        let timing = SymbolTiming {
            bits: &self.bits,
            alignment: pd.symbol_alignment(),
            train: layout.train.clone(),
        };
        matched_filter_downsample(&pd.slices()[0], pd.sps(), self.link.rrc_alpha, self.link.rrc_span, &timing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Receiver {
    Neural { id: String, spec: EqualizerSpec, cc: usize },
    Unequalized,
    Ffe { taps: usize, step: f64, n_train: usize },
}

impl Receiver {
    pub fn id(&self) -> &str {
        match self {
            Receiver::Neural { id, .. } => id,
            Receiver::Unequalized => UNEQUALIZED,
            Receiver::Ffe { .. } => FFE,
        }
    }

    pub fn framing(&self) -> &'static str {
        match self {
            Receiver::Neural { spec, .. } => match spec.framing.mode {
                FramingMode::Sa => "sa",
                FramingMode::Sy => "sy",
            },
            _ => "none",
        }
    }

    pub fn cc_per_symbol(&self) -> Option<usize> {
        match self {
            Receiver::Neural { cc, .. } => Some(*cc),
            Receiver::Unequalized => None,
            Receiver::Ffe { taps, .. } => Some(crate::complexity::cc_ffe(*taps)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub ber: BerResult,
    pub model: Option<TrainedModel>,
}

/// Fits the receiver on the training symbols and counts errors on the test
/// symbols.
pub fn evaluate(receiver: &Receiver, channel: &Channel, layout: &Layout, seed: u64) -> Result<Outcome> {
    let test = layout.test.clone();
    let reference = &channel.bits[test.clone()];
    match receiver {
        Receiver::Neural { spec, .. } => {
            let spec = EqualizerSpec { seed, ..spec.clone() };
            let capture = channel.capture();
            let model = train(&spec, &capture, &layout.split())?;
            let ber = model.evaluate(&capture, test)?;
            Ok(Outcome {
                ber,
                model: Some(model),
            })
        }
        Receiver::Unequalized => {
            let ds = channel.single_pd_symbols(layout)?;
            let decided = hard_decide(&ds.symbols.samples()[test], &ds.rule);
            Ok(Outcome {
                ber: count_ber(&decided, reference, 0)?,
                model: None,
            })
        }
        Receiver::Ffe { taps, step, n_train } => {
            let ds = channel.single_pd_symbols(layout)?;
            let x = standardized(ds.symbols.samples(), layout)?;
            let target: Vec<f64> = channel.bits.iter().map(|&b| 2.0 * b as f64 - 1.0).collect();
            let fit = layout.fit();
            let n = (*n_train).min(fit.len());
            let state = ffe_lms_train(&x, &target, FfeState::new(*taps, *step)?, fit.start, n)?;
            let y = ffe_apply(&x, &state);
            let held = layout.held_out();
            let rule = DecisionRule::fit_midpoint(&y[held.clone()], &channel.bits[held])?;
            let decided = hard_decide(&y[test], &rule);
            Ok(Outcome {
                ber: count_ber(&decided, reference, 0)?,
                model: None,
            })
        }
    }
}

/// Zero mean and unit variance over the training symbols.
fn standardized(x: &[f64], layout: &Layout) -> Result<Vec<f64>> {
    let t = &x[layout.train.clone()];
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t.len() as f64;
    if !(var > 0.0) {
        return Err(Error::param("constant receiver output over the training symbols"));
    }
    let inv = 1.0 / var.sqrt();
    Ok(x.iter().map(|v| (v - mean) * inv).collect())
}
