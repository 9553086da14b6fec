//! Experiment description, read from and written to TOML.
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//! profile = "fast"
//! output_dir = "results"
//!
//! [link]
//! snr_db = 20.0
//!
//! [sweep]
//! distances_km = [74.0]
//! snr_db = [6.0, 8.0, 10.0, 12.0]
//!
//! [[equalizers]]
//! preset = "sy-fnn"
//!
//! [[equalizers]]
//! preset = "sa-fnn"
//! epochs = 50
//! ```
//!
//! Unset fields take their defaults; unknown fields are rejected.

use crate::complexity::cc_ffe;
use crate::error::{Error, Result};
use crate::link::LinkConfig;
use crate::nn::{Activation, Architecture, EqualizerSpec, GruReadout, GruVariant, Optimizer};
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Desk-scale: 2^16 training symbols, Adam, capped epochs.
    Fast,
    /// Full-scale: 2^19 training symbols, tabulated SGD settings.
    Paper,
}

/// Symbol counts of the data sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitCounts {
    pub train: usize,
    pub test: usize,
    /// Tail of the training symbols held out for early stopping and
    /// decision fitting.
    pub validation: usize,
}

/// What a profile changes when the configuration leaves it open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSettings {
    pub splits: SplitCounts,
    pub epoch_cap: Option<usize>,
    /// Optimizer and learning rate replacing the tabulated ones.
    pub optimizer: Option<(Optimizer, f64)>,
}

impl Profile {
    pub fn settings(self) -> ProfileSettings {
        match self {
            Profile::Fast => ProfileSettings {
                splits: SplitCounts {
                    train: 1 << 16,
                    test: 1 << 17,
                    validation: 1 << 14,
                },
                epoch_cap: Some(100),
                optimizer: Some((Optimizer::Adam, 1e-3)),
            },
            Profile::Paper => ProfileSettings {
                splits: SplitCounts {
                    train: 1 << 19,
                    test: 1 << 16,
                    validation: 1 << 14,
                },
                epoch_cap: None,
                optimizer: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    pub distances_km: Vec<f64>,
    pub snr_db: Vec<f64>,
    /// Multiplications per symbol.
    pub budgets: Vec<usize>,
    /// Fixed SNR of the complexity scan.
    pub complexity_snr_db: f64,
    /// Grid extension step when a curve does not cross the threshold.
    pub snr_step_db: f64,
    pub snr_cap_db: f64,
    pub snr_floor_db: f64,
}

impl Default for SweepAxes {
    fn default() -> Self {
        SweepAxes {
            distances_km: vec![74.0],
            snr_db: (4..=14).step_by(2).map(f64::from).collect(),
            budgets: vec![100, 200, 500, 1000, 1500],
            complexity_snr_db: 12.0,
            snr_step_db: 1.0,
            snr_cap_db: 30.0,
            snr_floor_db: 0.0,
        }
    }
}

/// A tabulated equalizer with optional overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EqualizerEntry {
    pub preset: String,
    /// Name in result files; defaults to the preset name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_hidden: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_w: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_hidden: Option<Activation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_out: Option<Activation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learn_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mini_batch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<Optimizer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gru_variant: Option<GruVariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gru_readout: Option<GruReadout>,
}

impl EqualizerEntry {
    pub fn preset(name: &str) -> Self {
        EqualizerEntry {
            preset: name.to_string(),
            ..Default::default()
        }
    }

    pub fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.preset.clone())
    }

    /// Preset, then profile settings, then explicit overrides.
    pub fn resolve(&self, n_slices: usize, profile: &ProfileSettings) -> Result<EqualizerSpec> {
        let mut s = EqualizerSpec::preset(&self.preset)?;
        s.framing.n_slices = n_slices;
        // an explicit optimizer or rate keeps the tabulated pairing
        if let (Some((opt, lr)), None, None) = (profile.optimizer, self.optimizer, self.learn_rate) {
            s.optimizer = opt;
            s.learn_rate = lr;
        }
        if let Some(cap) = profile.epoch_cap {
            s.epochs = s.epochs.min(cap);
        }
        if let Some(k) = self.k {
            s.framing.k = k;
        }
        if let Some(n) = self.n_hidden {
            s.n_hidden = n;
        }
        s.arch = match s.arch {
            Architecture::Cnn { .. } => Architecture::Cnn {
                n_w: self.n_w.unwrap_or(s.framing.m()),
            },
            Architecture::Gru { variant, readout } => Architecture::Gru {
                variant: self.gru_variant.unwrap_or(variant),
                readout: self.gru_readout.unwrap_or(readout),
            },
            a => a,
        };
        s.f_hidden = self.f_hidden.unwrap_or(s.f_hidden);
        s.f_out = self.f_out.unwrap_or(s.f_out);
        s.var_target = self.var_target.unwrap_or(s.var_target);
        s.learn_rate = self.learn_rate.unwrap_or(s.learn_rate);
        s.mini_batch = self.mini_batch.unwrap_or(s.mini_batch);
        s.epochs = self.epochs.unwrap_or(s.epochs);
        s.patience = self.patience.unwrap_or(s.patience);
        s.optimizer = self.optimizer.unwrap_or(s.optimizer);
        s.validate()?;
        Ok(s)
    }
}

/// Linear and symbol-spaced baseline receivers evaluated at every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct References {
    /// Single photodiode, matched filter and threshold.
    pub unequalized: bool,
    pub ffe: bool,
    pub ffe_taps: usize,
    pub ffe_step: f64,
    pub ffe_train_symbols: usize,
}

impl Default for References {
    fn default() -> Self {
        References {
            unequalized: true,
            ffe: true,
            ffe_taps: 11,
            ffe_step: 1e-3,
            ffe_train_symbols: 50_000,
        }
    }
}

impl References {
    pub fn ffe_cc(&self) -> usize {
        cc_ffe(self.ffe_taps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub profile: Profile,
    pub output_dir: PathBuf,
    /// Overrides the profile's symbol counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splits: Option<SplitCounts>,
    pub link: LinkConfig,
    pub sweep: SweepAxes,
    pub references: References,
    pub equalizers: Vec<EqualizerEntry>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            profile: Profile::Fast,
            output_dir: PathBuf::from("results"),
            splits: None,
            link: LinkConfig::default(),
            sweep: SweepAxes::default(),
            references: References::default(),
            equalizers: vec![EqualizerEntry::preset("sy-fnn"), EqualizerEntry::preset("sa-fnn")],
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn splits(&self) -> SplitCounts {
        self.splits.unwrap_or(self.profile.settings().splits)
    }

    pub fn layout(&self) -> Result<Layout> {
        Layout::new(self.splits(), self.link.rrc_span)
    }

    /// Equalizer specs with ids, in configuration order.
    pub fn equalizer_specs(&self) -> Result<Vec<(String, EqualizerSpec)>> {
        let settings = self.profile.settings();
        self.equalizers
            .iter()
            .map(|e| Ok((e.id(), e.resolve(self.link.n_slices, &settings)?)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.link.validate()?;
        let s = &self.sweep;
        if s.distances_km.is_empty() || s.snr_db.is_empty() {
            return Err(Error::config("sweep.distances_km and sweep.snr_db must be non-empty"));
        }
        if s.distances_km.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::config("distances must be finite and >= 0"));
        }
        if s.snr_db.iter().any(|x| x.is_nan()) {
            return Err(Error::config("SNR grid contains NaN"));
        }
        if !(s.snr_step_db > 0.0) || !(s.snr_cap_db >= s.snr_floor_db) {
            return Err(Error::config("snr_step_db must be > 0 and snr_cap_db >= snr_floor_db"));
        }
        let specs = self.equalizer_specs()?;
        let mut ids: Vec<&String> = specs.iter().map(|(id, _)| id).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("equalizer ids must be unique"));
        }
        if ids.iter().any(|id| RESERVED_IDS.contains(&id.as_str())) {
            return Err(Error::config(format!("equalizer ids {RESERVED_IDS:?} are reserved")));
        }
        let r = &self.references;
        if r.ffe && (r.ffe_taps % 2 == 0 || !(r.ffe_step >= 0.0)) {
            return Err(Error::config("ffe_taps must be odd and ffe_step >= 0"));
        }
        let splits = self.splits();
        if splits.validation == 0 || splits.validation >= splits.train || splits.test == 0 {
            return Err(Error::config("splits need train > validation > 0 and test > 0"));
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical serialization.
    pub fn fingerprint(&self) -> Result<String> {
        Ok(format!("{:016x}", super::seed::fnv1a(self.to_toml()?.as_bytes())))
    }
}

pub const UNEQUALIZED: &str = "unequalized";
pub const FFE: &str = "ffe";
const RESERVED_IDS: [&str; 2] = [UNEQUALIZED, FFE];

/// Symbol positions: `[guard | train | test | guard]`, padded to a multiple
/// of 1024 symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub total: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
    pub validation: usize,
}

impl Layout {
    pub fn new(splits: SplitCounts, rrc_span: usize) -> Result<Self> {
        let guard = rrc_span + 64;
        let train = guard..guard + splits.train;
        let test = train.end..train.end + splits.test;
        let total = (test.end + guard).div_ceil(1024) * 1024;
        if splits.validation == 0 || splits.validation >= splits.train {
            return Err(Error::config("validation must be a proper part of the training split"));
        }
        Ok(Layout {
            total,
            train,
            test,
            validation: splits.validation,
        })
    }

    /// Training symbols excluding the held-out tail.
    pub fn fit(&self) -> Range<usize> {
        self.train.start..self.train.end - self.validation
    }

    pub fn held_out(&self) -> Range<usize> {
        self.train.end - self.validation..self.train.end
    }

    pub fn split(&self) -> crate::nn::Split {
        crate::nn::Split {
            train: self.train.clone(),
            test: self.test.clone(),
            validation: self.validation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn customized_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = 99;
        cfg.profile = Profile::Paper;
        cfg.splits = Some(SplitCounts {
            train: 5000,
            test: 3000,
            validation: 1000,
        });
        cfg.link.snr_db = 17.25;
        cfg.sweep.distances_km = vec![0.0, 30.5, 74.0];
        cfg.equalizers.push(EqualizerEntry {
            preset: "sy-gru".into(),
            id: Some("gru-small".into()),
            n_hidden: Some(3),
            k: Some(1),
            gru_variant: Some(GruVariant::Standard),
            learn_rate: Some(0.1 / 3.0),
            ..Default::default()
        });
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.fingerprint().unwrap(), cfg.fingerprint().unwrap());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            "schema_version = 2",
            "[sweep]\nsnr_db = []",
            "[[equalizers]]\npreset = \"sy-lstm\"",
            "[[equalizers]]\npreset = \"sy-fnn\"\n[[equalizers]]\npreset = \"sy-fnn\"",
            "[[equalizers]]\npreset = \"sy-fnn\"\nid = \"ffe\"",
            "unknown_key = 1",
            "[link]\nsim_sps = 1",
        ];
        for text in bad {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn profile_and_overrides_layer() {
        let fast = Profile::Fast.settings();
        let sy = EqualizerEntry::preset("sy-fnn").resolve(4, &fast).unwrap();
        assert_eq!((sy.optimizer, sy.learn_rate, sy.epochs), (Optimizer::Adam, 1e-3, 100));
        let paper = EqualizerEntry::preset("sy-fnn").resolve(4, &Profile::Paper.settings()).unwrap();
        assert_eq!((paper.optimizer, paper.learn_rate, paper.epochs), (Optimizer::Sgd, 1e-2, 200));
        let custom = EqualizerEntry {
            k: Some(1),
            epochs: Some(7),
            optimizer: Some(Optimizer::Sgd),
            ..EqualizerEntry::preset("sy-cnn")
        }
        .resolve(4, &fast)
        .unwrap();
        assert_eq!(custom.framing.m(), 6);
        assert_eq!(custom.arch, Architecture::Cnn { n_w: 6 });
        assert_eq!((custom.epochs, custom.optimizer, custom.learn_rate), (7, Optimizer::Sgd, 1e-2));
    }

    #[test]
    fn layout_is_guarded_and_padded() {
        let l = Layout::new(Profile::Fast.settings().splits, 64).unwrap();
        assert_eq!(l.train, 128..128 + 65536);
        assert_eq!(l.test.len(), 1 << 17);
        assert!(l.total >= l.test.end + 128 && l.total % 1024 == 0);
        assert_eq!(l.fit().len() + l.held_out().len(), l.train.len());
    }
}
