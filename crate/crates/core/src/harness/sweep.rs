//! Sweeps over distance, SNR and complexity budget.
//!
//! Every point draws its noise from a seed derived from the master seed and
//! the point coordinates, so a point gives the same records however the
//! sweep is scheduled. Records are sorted by coordinates before they leave
//! this module.

use super::config::{ExperimentConfig, Layout, UNEQUALIZED};
use super::receivers::{evaluate, Channel, Receiver};
use super::seed::{bits_seed, noise_seed, train_seed};
use crate::complexity::{realize_under_budget, ArchKind, ComplexityReport, Realization};
use crate::error::{Error, Result};
use crate::link::LinkConfig;
use crate::nn::Architecture;
use crate::rx::{required_snr, RequiredSnr, KP4_BER};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub distance_km: f64,
    pub snr_db: f64,
    pub equalizer: String,
    pub framing: String,
    pub ber: f64,
    pub errors: usize,
    pub bits: usize,
    pub cc_per_symbol: Option<usize>,
    pub train_loss: Option<f64>,
    pub best_epoch: Option<usize>,
    pub seed: u64,
    /// `ok` or the failure message.
    pub status: String,
}

impl Record {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    /// BER with zero-error points raised to half an error, so they can be
    /// placed on a log axis.
    pub fn floored_ber(&self) -> f64 {
        if self.errors == 0 && self.bits > 0 {
            0.5 / self.bits as f64
        } else {
            self.ber
        }
    }
}

/// Wall time of one sweep task; kept out of the records so result files stay
/// reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub label: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<Record>,
    pub fingerprint: String,
    pub seed: u64,
    pub timings: Vec<Timing>,
}

/// Receivers to run at one `(distance, snr)` point, as indices into the
/// experiment's receiver list.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub distance_km: f64,
    pub snr_db: f64,
    pub receivers: Vec<usize>,
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub layout: Layout,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let layout = config.layout()?;
        Ok(Experiment { config, layout })
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn link_at(&self, distance_km: f64, snr_db: f64) -> LinkConfig {
        LinkConfig {
            fiber_length_km: distance_km,
            snr_db,
            ..self.config.link.clone()
        }
    }

    pub fn channel(&self, distance_km: f64, snr_db: f64) -> Result<Channel> {
        let link = self.link_at(distance_km, snr_db);
        Channel::simulate(
            &link,
            self.layout.total,
            bits_seed(self.seed()),
            noise_seed(self.seed(), distance_km, snr_db),
        )
    }

    /// Configured equalizers followed by the enabled references.
    pub fn receivers(&self) -> Result<Vec<Receiver>> {
        let mut out = Vec::new();
        for (id, spec) in self.config.equalizer_specs()? {
            let cc = ComplexityReport::new(ArchKind::of(&spec.arch), spec.framing, spec.n_hidden, cnn_width(&spec.arch))?;
            out.push(Receiver::Neural {
                id,
                spec,
                cc: cc.cc_per_symbol,
            });
        }
        out.extend(self.reference_receivers());
        Ok(out)
    }

    fn reference_receivers(&self) -> Vec<Receiver> {
        let r = &self.config.references;
        let mut out = Vec::new();
        if r.unequalized {
            out.push(Receiver::Unequalized);
        }
        if r.ffe {
            out.push(Receiver::Ffe {
                taps: r.ffe_taps,
                step: r.ffe_step,
                n_train: r.ffe_train_symbols,
            });
        }
        out
    }

    /// Runs every point; failures become records instead of aborting.
    pub fn run_points(&self, receivers: &[Receiver], points: &[Point]) -> (Vec<Record>, Vec<Timing>) {
        let parts: Vec<(Vec<(usize, Record)>, Vec<Timing>)> =
            points.par_iter().map(|p| self.run_point(receivers, p)).collect();
        let mut records = Vec::new();
        let mut timings = Vec::new();
        for (r, t) in parts {
            records.extend(r);
            timings.extend(t);
        }
        records.sort_by(|a, b| {
            a.1.distance_km
                .total_cmp(&b.1.distance_km)
                .then(a.1.snr_db.total_cmp(&b.1.snr_db))
                .then(a.0.cmp(&b.0))
        });
        (records.into_iter().map(|r| r.1).collect(), timings)
    }

    fn run_point(&self, receivers: &[Receiver], p: &Point) -> (Vec<(usize, Record)>, Vec<Timing>) {
        let start = Instant::now();
        let label = format!("{} km {} dB", p.distance_km, p.snr_db);
        let channel = guarded(|| self.channel(p.distance_km, p.snr_db));
        let mut timings = vec![Timing {
            label: format!("{label} link"),
            seconds: start.elapsed().as_secs_f64(),
        }];
        let mut records = Vec::new();
        for &i in &p.receivers {
            let rx = &receivers[i];
            let seed = train_seed(self.seed(), p.distance_km, p.snr_db, rx.id());
            let mut rec = Record {
                distance_km: p.distance_km,
                snr_db: p.snr_db,
                equalizer: rx.id().to_string(),
                framing: rx.framing().to_string(),
                ber: f64::NAN,
                errors: 0,
                bits: 0,
                cc_per_symbol: rx.cc_per_symbol(),
                train_loss: None,
                best_epoch: None,
                seed,
                status: "ok".into(),
            };
            let t0 = Instant::now();
            let outcome = match &channel {
                Ok(ch) => guarded(|| evaluate(rx, ch, &self.layout, seed)),
                Err(e) => Err(e.clone()),
            };
            match outcome {
                Ok(o) => {
                    rec.ber = o.ber.ber;
                    rec.errors = o.ber.errors;
                    rec.bits = o.ber.bits_counted;
                    if let Some(m) = o.model {
                        rec.train_loss = Some(m.final_train_loss());
                        rec.best_epoch = Some(m.best_epoch);
                    }
                }
                Err(msg) => rec.status = format!("error: {msg}"),
            }
            timings.push(Timing {
                label: format!("{label} {}", rx.id()),
                seconds: t0.elapsed().as_secs_f64(),
            });
            records.push((i, rec));
        }
        (records, timings)
    }

    fn result(&self, records: Vec<Record>, timings: Vec<Timing>) -> Result<SweepResult> {
        Ok(SweepResult {
            records,
            fingerprint: self.config.fingerprint()?,
            seed: self.seed(),
            timings,
        })
    }

    /// BER against SNR at every configured distance, plus the unequalized
    /// back-to-back reference.
    pub fn run_ber_vs_snr(&self) -> Result<SweepResult> {
        let receivers = self.receivers()?;
        let points = self.grid_points(&receivers);
        let (records, timings) = self.run_points(&receivers, &points);
        self.result(records, timings)
    }

    fn grid_points(&self, receivers: &[Receiver]) -> Vec<Point> {
        let s = &self.config.sweep;
        let all: Vec<usize> = (0..receivers.len()).collect();
        let b2b: Vec<usize> = receivers
            .iter()
            .position(|r| *r == Receiver::Unequalized)
            .into_iter()
            .collect();
        let mut points = Vec::new();
        if !s.distances_km.contains(&0.0) && !b2b.is_empty() {
            for &snr in &s.snr_db {
                points.push(Point {
                    distance_km: 0.0,
                    snr_db: snr,
                    receivers: b2b.clone(),
                });
            }
        }
        for &d in &s.distances_km {
            for &snr in &s.snr_db {
                points.push(Point {
                    distance_km: d,
                    snr_db: snr,
                    receivers: all.clone(),
                });
            }
        }
        points
    }

    /// Grid sweep at every distance, extended in `snr_step_db` steps (up to
    /// the cap, down to the floor) until each curve brackets the KP4 limit.
    pub fn run_penalty_vs_distance(&self) -> Result<SweepResult> {
        let receivers = self.receivers()?;
        let s = &self.config.sweep;
        let (mut records, mut timings) = self.run_points(&receivers, &self.grid_points(&receivers));
        loop {
            let mut extra: Vec<Point> = Vec::new();
            let mut distances: Vec<f64> = s.distances_km.clone();
            if !distances.contains(&0.0) {
                distances.push(0.0);
            }
            for &d in &distances {
                for (i, rx) in receivers.iter().enumerate() {
                    let curve: Vec<&Record> = records
                        .iter()
                        .filter(|r| r.distance_km == d && r.equalizer == rx.id() && r.ok())
                        .collect();
                    if curve.is_empty() {
                        continue;
                    }
                    let hi = curve.iter().map(|r| r.snr_db).fold(f64::NEG_INFINITY, f64::max);
                    let lo = curve.iter().map(|r| r.snr_db).fold(f64::INFINITY, f64::min);
                    let next = if curve.iter().all(|r| r.floored_ber() > KP4_BER) {
                        Some(hi + s.snr_step_db).filter(|&x| x <= s.snr_cap_db)
                    } else if curve.iter().all(|r| r.floored_ber() <= KP4_BER) {
                        Some(lo - s.snr_step_db).filter(|&x| x >= s.snr_floor_db)
                    } else {
                        None
                    };
                    if let Some(snr) = next {
                        match extra.iter_mut().find(|p| p.distance_km == d && p.snr_db == snr) {
                            Some(p) => p.receivers.push(i),
                            None => extra.push(Point {
                                distance_km: d,
                                snr_db: snr,
                                receivers: vec![i],
                            }),
                        }
                    }
                }
            }
            if extra.is_empty() {
                break;
            }
            let (r, t) = self.run_points(&receivers, &extra);
            records.extend(r);
            timings.extend(t);
        }
        let order: Vec<&str> = receivers.iter().map(|r| r.id()).collect();
        records.sort_by(|a, b| {
            let rank = |r: &Record| order.iter().position(|id| *id == r.equalizer);
            a.distance_km
                .total_cmp(&b.distance_km)
                .then(a.snr_db.total_cmp(&b.snr_db))
                .then(rank(a).cmp(&rank(b)))
        });
        self.result(records, timings)
    }

    /// Each equalizer realized at each budget, evaluated at every distance at
    /// the complexity-scan SNR.
    pub fn run_complexity_scan(&self) -> Result<(SweepResult, Vec<(String, Realization)>)> {
        let s = &self.config.sweep;
        if s.budgets.is_empty() {
            return Err(Error::config("sweep.budgets must be non-empty for a complexity scan"));
        }
        let mut receivers = Vec::new();
        let mut realizations = Vec::new();
        for (id, spec) in self.config.equalizer_specs()? {
            for &budget in &s.budgets {
                let r = realize_under_budget(ArchKind::of(&spec.arch), spec.framing, budget)?;
                if let Some(sel) = r.selected {
                    let mut spec = spec.clone();
                    spec.framing.k = sel.k;
                    spec.n_hidden = sel.n_h;
                    if let Architecture::Cnn { .. } = spec.arch {
                        spec.arch = Architecture::Cnn { n_w: sel.m };
                    }
                    receivers.push(Receiver::Neural {
                        id: format!("{id}@{budget}"),
                        spec,
                        cc: sel.cc_per_symbol,
                    });
                }
                realizations.push((id.clone(), r));
            }
        }
        let all: Vec<usize> = (0..receivers.len()).collect();
        let points: Vec<Point> = s
            .distances_km
            .iter()
            .map(|&d| Point {
                distance_km: d,
                snr_db: s.complexity_snr_db,
                receivers: all.clone(),
            })
            .collect();
        let (records, timings) = self.run_points(&receivers, &points);
        Ok((self.result(records, timings)?, realizations))
    }
}

fn cnn_width(arch: &Architecture) -> Option<usize> {
    match arch {
        Architecture::Cnn { n_w } => Some(*n_w),
        _ => None,
    }
}

/// Runs `f`, turning errors and panics into messages.
fn guarded<T>(f: impl FnOnce() -> Result<T>) -> std::result::Result<T, String> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(e.to_string()),
        Err(panic) => Err(panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .map_or_else(|| "panic".to_string(), |s| format!("panic: {s}"))),
    }
}

/// `(snr, floored BER)` of one equalizer at one distance, by SNR.
pub fn curve(records: &[Record], distance_km: f64, equalizer: &str) -> Vec<(f64, f64)> {
    let mut c: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.distance_km == distance_km && r.equalizer == equalizer && r.ok())
        .map(|r| (r.snr_db, r.floored_ber()))
        .collect();
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    c
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyRow {
    pub distance_km: f64,
    pub equalizer: String,
    pub required: RequiredSnr,
    /// Against the unequalized back-to-back requirement.
    pub penalty_db: Option<f64>,
}

/// Required SNR at the KP4 limit for every `(distance, equalizer)` curve.
/// Returns the back-to-back reference requirement alongside.
pub fn penalty_table(records: &[Record]) -> (RequiredSnr, Vec<PenaltyRow>) {
    let reference = required_snr(&curve(records, 0.0, UNEQUALIZED), KP4_BER);
    let mut keys: Vec<(f64, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in records {
        if seen.insert((r.distance_km.to_bits(), r.equalizer.clone())) {
            keys.push((r.distance_km, r.equalizer.clone()));
        }
    }
    keys.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rows = keys
        .into_iter()
        .map(|(d, eq)| {
            let required = required_snr(&curve(records, d, &eq), KP4_BER);
            let penalty_db = match (required, reference) {
                (RequiredSnr::Reached(a), RequiredSnr::Reached(b)) => Some(a - b),
                _ => None,
            };
            PenaltyRow {
                distance_km: d,
                equalizer: eq,
                required,
                penalty_db,
            }
        })
        .collect();
    (reference, rows)
}

/// Longest distance at which each equalizer stays at or below the KP4 limit.
pub fn reach_table(records: &[Record]) -> Vec<(String, Option<usize>, Option<f64>)> {
    let mut out: Vec<(String, Option<usize>, Option<f64>)> = Vec::new();
    for r in records {
        if !out.iter().any(|(id, _, _)| *id == r.equalizer) {
            out.push((r.equalizer.clone(), r.cc_per_symbol, None));
        }
        let entry = out.iter_mut().find(|(id, _, _)| *id == r.equalizer).expect("inserted above");
        if r.ok() && r.floored_ber() <= KP4_BER {
            entry.2 = Some(entry.2.map_or(r.distance_km, |d: f64| d.max(r.distance_km)));
        }
    }
    out
}
