//! Equalizer specifications, mini-batch training and inference.

use super::framing::{Framer, FramingMode, FramingSpec};
use super::network::{Architecture, GruReadout, GruVariant, Network, Workspace};
use super::Activation;
use crate::dsp::{make_prng, RealSequence};
use crate::error::{Error, Result};
use crate::link::SlicedSignal;
use crate::rx::{best_phase, count_ber, decimate, hard_decide, matched_filter, BerResult, DecisionRule, SymbolTiming};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Frames per parallel task; fixed so gradient sums are reduced in the same
/// order regardless of thread count.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// Plain mini-batch gradient descent.
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EqualizerSpec {
    pub arch: Architecture,
    pub framing: FramingSpec,
    pub n_hidden: usize,
    pub f_hidden: Activation,
    pub f_out: Activation,
    /// Input variance after per-slice standardization.
    pub var_target: f64,
    pub learn_rate: f64,
    pub mini_batch: usize,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl EqualizerSpec {
    pub const PRESETS: [&'static str; 6] = ["sa-fnn", "sa-gru", "sa-cnn", "sy-fnn", "sy-gru", "sy-cnn"];

    /// Tuned hyperparameter sets, by name (`sa-fnn`, `sy-cnn`, ...).
    pub fn preset(name: &str) -> Result<Self> {
        let (mode, arch) = name
            .split_once('-')
            .ok_or_else(|| Error::config(format!("unknown equalizer preset `{name}`")))?;
        let sa = match mode {
            "sa" => true,
            "sy" => false,
            _ => return Err(Error::config(format!("unknown equalizer preset `{name}`"))),
        };
        let framing = if sa {
            FramingSpec::sa(3, 8, 4)
        } else {
            FramingSpec::sy(3, 2, 4)
        };
        let m = framing.m();
        let (arch, n_hidden, f_hidden) = match (arch, sa) {
            ("fnn", true) => (Architecture::Fnn, 10, Activation::Sigmoid),
            ("fnn", false) => (Architecture::Fnn, 10, Activation::Relu),
            ("gru", _) => (
                Architecture::Gru {
                    variant: GruVariant::Verbatim,
                    readout: GruReadout::FinalState,
                },
                10,
                Activation::Tanh,
            ),
            ("cnn", _) => (Architecture::Cnn { n_w: m }, 15, Activation::Sigmoid),
            _ => return Err(Error::config(format!("unknown equalizer preset `{name}`"))),
        };
        Ok(EqualizerSpec {
            arch,
            framing,
            n_hidden,
            f_hidden,
            f_out: if sa { Activation::Linear } else { Activation::Sigmoid },
            var_target: if sa { 0.17 } else { 0.69 },
            learn_rate: if sa { 0.5e-2 } else { 1e-2 },
            mini_batch: if sa { 1800 } else { 1000 },
            epochs: 200,
            patience: 20,
            optimizer: Optimizer::Sgd,
            seed: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.framing.validate()?;
        if !matches!(self.f_out, Activation::Linear | Activation::Sigmoid) {
            return Err(Error::config("output activation must be linear or sigmoid"));
        }
        if !(self.var_target > 0.0) || !self.var_target.is_finite() {
            return Err(Error::config("var_target must be positive"));
        }
        if !(self.learn_rate >= 0.0) || !self.learn_rate.is_finite() {
            return Err(Error::config("learn_rate must be >= 0"));
        }
        if self.mini_batch == 0 {
            return Err(Error::config("mini_batch must be >= 1"));
        }
        self.network().map(|_| ())
    }

    /// Untrained network with this geometry.
    pub fn network(&self) -> Result<Network> {
        Network::new(
            self.arch,
            self.framing.m(),
            self.framing.n_slices,
            self.n_hidden,
            self.f_hidden,
            self.f_out,
        )
    }
}

/// One channel realization as seen by an equalizer.
#[derive(Debug, Clone, Copy)]
pub struct LinkCapture<'a> {
    /// Detected slices at the simulation rate.
    pub sliced: &'a SlicedSignal,
    /// Transmitter drive at the same rate and alignment (sample-output target).
    pub drive: &'a RealSequence,
    pub bits: &'a [u8],
    pub rrc_alpha: f64,
    pub rrc_span: usize,
}

/// Symbol index ranges. The last `validation` training symbols are held out
/// for early stopping and decision fitting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Range<usize>,
    pub test: Range<usize>,
    pub validation: usize,
}

impl Split {
    fn fit(&self) -> Range<usize> {
        self.train.start..self.train.end - self.validation
    }

    fn held_out(&self) -> Range<usize> {
        self.train.end - self.validation..self.train.end
    }

    fn validate(&self, n_bits: usize) -> Result<()> {
        if self.validation == 0 || self.validation >= self.train.len() {
            return Err(Error::config("validation must be a non-empty proper part of the training split"));
        }
        if self.train.end > n_bits || self.test.end > n_bits || self.test.is_empty() {
            return Err(Error::config(format!(
                "splits {:?}/{:?} do not fit {n_bits} symbols",
                self.train, self.test
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub train: f64,
    pub validation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: EqualizerSpec,
    pub network: Network,
    /// Per-slice `(mean, scale)`: inputs become `(x - mean) * scale`.
    pub normalization: Vec<(f64, f64)>,
    pub rule: DecisionRule,
    /// Matched-filter sampling phase (sample-output framing only).
    pub phase: Option<usize>,
    /// RRC roll-off and span of the matched filter (sample-output framing only).
    pub matched_filter: Option<(f64, usize)>,
    pub loss_trace: Vec<EpochLoss>,
    pub best_epoch: usize,
}

impl TrainedModel {
    pub fn final_train_loss(&self) -> f64 {
        self.loss_trace.get(self.best_epoch).map_or(f64::NAN, |l| l.train)
    }

    /// Bit errors over `symbols`.
    pub fn evaluate(&self, capture: &LinkCapture, symbols: Range<usize>) -> Result<BerResult> {
        let decided = equalize(self, capture, symbols.clone())?;
        count_ber(&decided, &capture.bits[symbols], 0)
    }
}

struct Prepared {
    framer: Framer,
    targets: Vec<f64>,
}

impl Prepared {
    fn sps(&self) -> usize {
        self.framer.spec().sps
    }

    fn mode(&self) -> FramingMode {
        self.framer.spec().mode
    }

    /// Output units belonging to a symbol range.
    fn units(&self, symbols: &Range<usize>) -> Range<usize> {
        match self.mode() {
            FramingMode::Sy => symbols.clone(),
            FramingMode::Sa => {
                let (a, s) = (self.framer.alignment(), self.sps());
                a + symbols.start * s..a + symbols.end * s
            }
        }
    }

    fn check_units(&self, units: &Range<usize>) -> Result<()> {
        if units.is_empty() {
            return Ok(());
        }
        self.framer.frame(units.start)?;
        self.framer.frame(units.end - 1)?;
        Ok(())
    }
}

fn resample_capture(spec: &FramingSpec, capture: &LinkCapture) -> Result<(SlicedSignal, Option<Vec<f64>>)> {
    let sliced = capture.sliced.resampled(spec.sps)?;
    let drive = match spec.mode {
        FramingMode::Sy => None,
        FramingMode::Sa => {
            let d = SlicedSignal::new(
                vec![capture.drive.clone()],
                capture.sliced.sps(),
                capture.sliced.symbol_alignment(),
            )?;
            Some(d.resampled(spec.sps)?.slices()[0].samples().to_vec())
        }
    };
    Ok((sliced, drive))
}

fn fit_normalization(framer: &Framer, samples: Range<usize>, var_target: f64) -> Result<Vec<(f64, f64)>> {
    let n = framer.spec().n_slices;
    (0..n)
        .map(|j| {
            let vals: Vec<f64> = framer
                .slice_values(j)
                .skip(samples.start)
                .take(samples.len())
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vals.len() as f64;
            if !(var > 0.0) {
                return Err(Error::param(format!("slice {j} is constant over the fitting range")));
            }
            Ok((mean, (var_target / var).sqrt()))
        })
        .collect()
}

fn prepare(
    spec: &EqualizerSpec,
    capture: &LinkCapture,
    norm: Option<&[(f64, f64)]>,
    fit_symbols: &Range<usize>,
) -> Result<(Prepared, Vec<(f64, f64)>)> {
    if capture.drive.len() != capture.sliced.len() {
        return Err(Error::Dimension {
            expected: capture.sliced.len(),
            got: capture.drive.len(),
        });
    }
    let (sliced, drive) = resample_capture(&spec.framing, capture)?;
    let mut framer = Framer::new(&sliced, spec.framing)?;
    let norm = match norm {
        Some(n) => n.to_vec(),
        None => {
            let (a, s) = (framer.alignment(), spec.framing.sps);
            let samples = a + fit_symbols.start * s..(a + fit_symbols.end * s).min(framer.n_samples());
            fit_normalization(&framer, samples, spec.var_target)?
        }
    };
    if norm.len() != spec.framing.n_slices {
        return Err(Error::Dimension {
            expected: spec.framing.n_slices,
            got: norm.len(),
        });
    }
    framer.map_values(|j, v| (v - norm[j].0) * norm[j].1);
    let targets = match drive {
        Some(d) => d,
        None => capture.bits.iter().map(|&b| b as f64).collect(),
    };
    Ok((Prepared { framer, targets }, norm))
}

fn outputs(net: &Network, prep: &Prepared, units: Range<usize>) -> Vec<f64> {
    let idx: Vec<usize> = units.collect();
    idx.par_chunks(CHUNK)
        .map_init(Workspace::default, |ws, chunk| {
            chunk
                .iter()
                .map(|&i| net.predict(prep.framer.frame_at(i), ws))
                .collect::<Vec<f64>>()
        })
        .flatten_iter()
        .collect()
}

fn mse(net: &Network, prep: &Prepared, units: Range<usize>) -> f64 {
    let n = units.len();
    let targets = &prep.targets;
    let parts: Vec<f64> = outputs(net, prep, units.clone())
        .par_chunks(CHUNK)
        .zip(units.collect::<Vec<_>>().par_chunks(CHUNK))
        .map(|(y, i)| y.iter().zip(i).map(|(y, &i)| (y - targets[i]).powi(2)).sum())
        .collect();
    parts.iter().sum::<f64>() / n as f64
}

/// Sum of squared errors and its gradient over one mini-batch, scaled to the
/// batch mean.
fn batch_gradient(net: &Network, prep: &Prepared, batch: &[usize], grad: &mut [f64]) -> f64 {
    let p = net.n_params();
    let parts: Vec<(Vec<f64>, f64)> = batch
        .par_chunks(CHUNK)
        .map_init(Workspace::default, |ws, chunk| {
            let mut g = vec![0.0; p];
            let mut loss = 0.0;
            for &i in chunk {
                let x = prep.framer.frame_at(i);
                let y = net.predict(x, ws);
                let e = y - prep.targets[i];
                loss += e * e;
                net.backward(x, 2.0 * e, ws, &mut g);
            }
            (g, loss)
        })
        .collect();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (g, l) in parts {
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
        loss += l;
    }
    let scale = 1.0 / batch.len() as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
    loss
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-8);
        }
    }
}

/// Decision stage fitted on held-out symbols: the threshold for symbol
/// output, matched filter phase and threshold for sample output.
fn fit_decision(
    net: &Network,
    prep: &Prepared,
    capture: &LinkCapture,
    symbols: Range<usize>,
) -> Result<(DecisionRule, Option<usize>)> {
    match prep.mode() {
        FramingMode::Sy => {
            let y = outputs(net, prep, symbols.clone());
            Ok((DecisionRule::fit_midpoint(&y, &capture.bits[symbols])?, None))
        }
        FramingMode::Sa => {
            let filtered = sa_filtered(net, prep, capture.rrc_alpha, capture.rrc_span, &symbols)?;
            let timing = SymbolTiming {
                bits: capture.bits,
                alignment: prep.framer.alignment(),
                train: symbols,
            };
            let ds = best_phase(&filtered, prep.sps(), &timing)?;
            Ok((ds.rule, Some(ds.phase)))
        }
    }
}

/// Equalized waveform around `symbols`, matched filtered.
fn sa_filtered(
    net: &Network,
    prep: &Prepared,
    rrc_alpha: f64,
    rrc_span: usize,
    symbols: &Range<usize>,
) -> Result<RealSequence> {
    let sps = prep.sps();
    let n = prep.framer.n_samples();
    let l = prep.framer.spec().l();
    let pad = (rrc_span / 2 + 1) * sps;
    let units = prep.units(symbols);
    let lo = units.start.saturating_sub(pad).max(l);
    let hi = (units.end + pad).min(n.saturating_sub(l));
    prep.check_units(&units)?;
    let mut wave = vec![0.0; n];
    wave[lo..hi].copy_from_slice(&outputs(net, prep, lo..hi));
    matched_filter(&RealSequence::new(wave, 1.0)?, sps, rrc_alpha, rrc_span)
}

/// Trains `spec` on `split.train` and fits the decision stage on the
/// held-out tail of the training split.
pub fn train(spec: &EqualizerSpec, capture: &LinkCapture, split: &Split) -> Result<TrainedModel> {
    spec.validate()?;
    split.validate(capture.bits.len())?;
    let (fit, held) = (split.fit(), split.held_out());
    let (prep, normalization) = prepare(spec, capture, None, &fit)?;
    let (fit_units, val_units) = (prep.units(&fit), prep.units(&held));
    prep.check_units(&fit_units)?;
    prep.check_units(&val_units)?;

    let mut rng = make_prng(spec.seed);
    let mut net = spec.network()?;
    net.init_glorot(&mut rng);
    let mut order: Vec<usize> = fit_units.collect();
    let mut grad = vec![0.0; net.n_params()];
    let mut adam = Adam {
        m: vec![0.0; net.n_params()],
        v: vec![0.0; net.n_params()],
        t: 0,
    };

    let mut trace = Vec::new();
    let mut best = (f64::INFINITY, 0usize, net.params().to_vec());
    for epoch in 0..spec.epochs {
        order.shuffle(&mut rng);
        let mut sse = 0.0;
        for batch in order.chunks(spec.mini_batch) {
            sse += batch_gradient(&net, &prep, batch, &mut grad);
            match spec.optimizer {
                Optimizer::Sgd => {
                    for (p, g) in net.params_mut().iter_mut().zip(&grad) {
                        *p -= spec.learn_rate * g;
                    }
                }
                Optimizer::Adam => adam.step(net.params_mut(), &grad, spec.learn_rate),
            }
        }
        let train_mse = sse / order.len() as f64;
        let val_mse = mse(&net, &prep, val_units.clone());
        if !train_mse.is_finite() || !val_mse.is_finite() || net.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::Divergence {
                epoch,
                learn_rate: spec.learn_rate,
            });
        }
        trace.push(EpochLoss {
            train: train_mse,
            validation: val_mse,
        });
        if val_mse < best.0 {
            best = (val_mse, epoch, net.params().to_vec());
        } else if epoch - best.1 >= spec.patience {
            break;
        }
    }
    let best_epoch = if trace.is_empty() { 0 } else { best.1 };
    net.set_params(best.2)?;
    let (rule, phase) = fit_decision(&net, &prep, capture, held)?;
    Ok(TrainedModel {
        spec: spec.clone(),
        network: net,
        normalization,
        rule,
        phase,
        matched_filter: (spec.framing.mode == FramingMode::Sa).then_some((capture.rrc_alpha, capture.rrc_span)),
        loss_trace: trace,
        best_epoch,
    })
}

/// Raw network outputs for every output unit of `symbols` (one per symbol
/// for symbol output, `sps` per symbol for sample output).
pub fn equalizer_outputs(model: &TrainedModel, capture: &LinkCapture, symbols: Range<usize>) -> Result<Vec<f64>> {
    let (prep, _) = prepare(&model.spec, capture, Some(&model.normalization), &symbols)?;
    let units = prep.units(&symbols);
    prep.check_units(&units)?;
    Ok(outputs(&model.network, &prep, units))
}

/// Hard decisions for `symbols`.
pub fn equalize(model: &TrainedModel, capture: &LinkCapture, symbols: Range<usize>) -> Result<Vec<u8>> {
    if symbols.end > capture.bits.len() {
        return Err(Error::Alignment(format!(
            "symbols {symbols:?} beyond the {} transmitted",
            capture.bits.len()
        )));
    }
    let (prep, _) = prepare(&model.spec, capture, Some(&model.normalization), &symbols)?;
    let values = match prep.mode() {
        FramingMode::Sy => {
            prep.check_units(&symbols)?;
            outputs(&model.network, &prep, symbols)
        }
        FramingMode::Sa => {
            let (alpha, span) = model
                .matched_filter
                .ok_or_else(|| Error::config("sample-output model without matched filter settings"))?;
            let phase = model
                .phase
                .ok_or_else(|| Error::config("sample-output model without sampling phase"))?;
            let filtered = sa_filtered(&model.network, &prep, alpha, span, &symbols)?;
            let sym = decimate(&filtered, prep.sps(), prep.framer.alignment(), phase, symbols.end);
            sym.samples()[symbols].to_vec()
        }
    };
    Ok(hard_decide(&values, &model.rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::generate_bits;
    use crate::link::{run_link, LinkConfig};

    #[test]
    fn presets_reproduce_table_geometry() {
        let sa = EqualizerSpec::preset("sa-fnn").unwrap();
        assert_eq!(sa.framing.m(), 49);
        assert_eq!((sa.n_hidden, sa.mini_batch, sa.var_target), (10, 1800, 0.17));
        let sy = EqualizerSpec::preset("sy-cnn").unwrap();
        assert_eq!(sy.framing.m(), 14);
        assert_eq!(sy.arch, Architecture::Cnn { n_w: 14 });
        assert_eq!((sy.n_hidden, sy.f_out), (15, Activation::Sigmoid));
        assert_eq!(EqualizerSpec::preset("sa-cnn").unwrap().arch, Architecture::Cnn { n_w: 49 });
        assert_eq!(EqualizerSpec::preset("sy-fnn").unwrap().f_hidden, Activation::Relu);
        for name in EqualizerSpec::PRESETS {
            assert!(EqualizerSpec::preset(name).unwrap().validate().is_ok());
        }
        assert!(EqualizerSpec::preset("xx-fnn").is_err());
        assert!(EqualizerSpec::preset("sy-lstm").is_err());
    }

    struct Fixture {
        bits: Vec<u8>,
        run: crate::link::LinkRun,
        cfg: LinkConfig,
    }

    impl Fixture {
        fn new(n: usize, km: f64, snr_db: f64) -> Self {
            let cfg = LinkConfig {
                fiber_length_km: km,
                snr_db,
                ..LinkConfig::default()
            };
            let bits = generate_bits(&mut make_prng(11), n).unwrap();
            let run = run_link(&bits, &cfg, &mut make_prng(12)).unwrap();
            Fixture { bits, run, cfg }
        }

        fn capture(&self) -> LinkCapture<'_> {
            LinkCapture {
                sliced: &self.run.sliced,
                drive: &self.run.drive,
                bits: &self.bits,
                rrc_alpha: self.cfg.rrc_alpha,
                rrc_span: self.cfg.rrc_span,
            }
        }
    }

    fn small_split() -> Split {
        Split {
            train: 200..4200,
            test: 4200..5800,
            validation: 1000,
        }
    }

    #[test]
    fn sy_fnn_learns_noiseless_b2b() {
        let fx = Fixture::new(6000, 0.0, f64::INFINITY);
        let mut spec = EqualizerSpec::preset("sy-fnn").unwrap();
        spec.optimizer = Optimizer::Adam;
        spec.learn_rate = 3e-3;
        spec.epochs = 60;
        let model = train(&spec, &fx.capture(), &small_split()).unwrap();
        let r = model.evaluate(&fx.capture(), 4200..5800).unwrap();
        assert_eq!(r.errors, 0);
        assert!(model.network.params().iter().all(|p| p.is_finite()));
        let again = model.evaluate(&fx.capture(), 4200..5800).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn sa_fnn_learns_noiseless_b2b() {
        let fx = Fixture::new(6000, 0.0, f64::INFINITY);
        let mut spec = EqualizerSpec::preset("sa-fnn").unwrap();
        spec.optimizer = Optimizer::Adam;
        spec.learn_rate = 1e-3;
        spec.epochs = 15;
        let model = train(&spec, &fx.capture(), &small_split()).unwrap();
        assert!(model.phase.is_some());
        let r = model.evaluate(&fx.capture(), 4200..5800).unwrap();
        assert_eq!(r.errors, 0);
    }

    #[test]
    fn sgd_loss_decreases_on_a_moving_average() {
        let fx = Fixture::new(6000, 20.0, 20.0);
        let mut spec = EqualizerSpec::preset("sy-fnn").unwrap();
        spec.epochs = 40;
        let model = train(&spec, &fx.capture(), &small_split()).unwrap();
        let train: Vec<f64> = model.loss_trace.iter().map(|l| l.train).collect();
        let avg: Vec<f64> = train.windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
        assert!(avg.windows(2).all(|w| w[1] <= w[0]), "{avg:?}");
        assert!(model.network.params().iter().all(|p| p.is_finite()));
    }

    #[test]
    fn zero_learn_rate_keeps_initial_parameters() {
        let fx = Fixture::new(6000, 10.0, 20.0);
        let mut spec = EqualizerSpec::preset("sy-fnn").unwrap();
        spec.learn_rate = 0.0;
        spec.epochs = 2;
        let model = train(&spec, &fx.capture(), &small_split()).unwrap();
        let mut init = spec.network().unwrap();
        init.init_glorot(&mut make_prng(spec.seed));
        assert_eq!(model.network.params(), init.params());
    }

    #[test]
    fn divergence_is_reported() {
        let fx = Fixture::new(6000, 10.0, 20.0);
        let mut spec = EqualizerSpec::preset("sa-fnn").unwrap();
        spec.learn_rate = 1e6;
        spec.epochs = 5;
        let err = train(&spec, &fx.capture(), &small_split()).unwrap_err();
        assert!(matches!(err, Error::Divergence { learn_rate, .. } if learn_rate == 1e6), "{err}");
    }

    #[test]
    fn bad_splits_are_rejected() {
        let fx = Fixture::new(1000, 0.0, f64::INFINITY);
        let spec = EqualizerSpec::preset("sy-fnn").unwrap();
        let too_long = Split {
            train: 100..900,
            test: 900..1100,
            validation: 100,
        };
        assert!(train(&spec, &fx.capture(), &too_long).is_err());
        let at_edge = Split {
            train: 0..800,
            test: 800..900,
            validation: 100,
        };
        assert!(matches!(train(&spec, &fx.capture(), &at_edge), Err(Error::Boundary { .. })));
    }
}
