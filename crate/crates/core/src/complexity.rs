//! Real multiplications per equalized symbol (RMPS) and hyperparameter
//! realizations under a multiplication budget.

use crate::error::{Error, Result};
use crate::nn::{Activation, Architecture, FramingMode, FramingSpec, GruReadout, GruVariant, MulCounter, Network};
use serde::Serialize;
use std::fmt::Write as _;

/// `M n N_h + N_h N_out`
pub fn cc_fnn(m: usize, n_slices: usize, n_h: usize, n_out: usize) -> usize {
    m * n_slices * n_h + n_h * n_out
}

/// `3 (n N_h + N_h^2) M + N_h N_out M`
pub fn cc_gru(m: usize, n_slices: usize, n_h: usize, n_out: usize) -> usize {
    3 * (n_slices * n_h + n_h * n_h) * m + n_h * n_out * m
}

/// `n N_h N_w (M - N_w + 1) + (M - N_w + 1) N_h N_out`
pub fn cc_cnn(m: usize, n_slices: usize, n_h: usize, n_w: usize, n_out: usize) -> Result<usize> {
    if n_w == 0 || n_w > m {
        return Err(Error::config(format!("filter width {n_w} must lie in 1..={m}")));
    }
    let len = m - n_w + 1;
    Ok(n_slices * n_h * n_w * len + len * n_h * n_out)
}

/// One multiplication per tap plus one for the output scaling.
pub fn cc_ffe(n_taps: usize) -> usize {
    n_taps + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    Fnn,
    Gru,
    Cnn,
}

impl ArchKind {
    pub fn of(arch: &Architecture) -> Self {
        match arch {
            Architecture::Fnn => ArchKind::Fnn,
            Architecture::Gru { .. } => ArchKind::Gru,
            Architecture::Cnn { .. } => ArchKind::Cnn,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArchKind::Fnn => "fnn",
            ArchKind::Gru => "gru",
            ArchKind::Cnn => "cnn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub arch: ArchKind,
    pub mode: FramingMode,
    pub k: usize,
    pub m: usize,
    pub n_h: usize,
    /// CNN only.
    pub n_w: Option<usize>,
    pub n_out: usize,
    pub n_slices: usize,
    pub sps: usize,
    pub cc_per_unit: usize,
    /// Sa equalizers run once per sample, so their per-unit count is
    /// multiplied by `sps`.
    pub cc_per_symbol: usize,
}

impl ComplexityReport {
    /// `n_w` defaults to the full memory for CNNs.
    pub fn new(arch: ArchKind, framing: FramingSpec, n_h: usize, n_w: Option<usize>) -> Result<Self> {
        framing.validate()?;
        if n_h == 0 {
            return Err(Error::config("hidden size must be >= 1"));
        }
        let m = framing.m();
        let n = framing.n_slices;
        let (cc, n_w) = match arch {
            ArchKind::Fnn => (cc_fnn(m, n, n_h, 1), None),
            ArchKind::Gru => (cc_gru(m, n, n_h, 1), None),
            ArchKind::Cnn => {
                let w = n_w.unwrap_or(m);
                (cc_cnn(m, n, n_h, w, 1)?, Some(w))
            }
        };
        let per_symbol = match framing.mode {
            FramingMode::Sa => cc * framing.sps,
            FramingMode::Sy => cc,
        };
        Ok(ComplexityReport {
            arch,
            mode: framing.mode,
            k: framing.k,
            m,
            n_h,
            n_w,
            n_out: 1,
            n_slices: n,
            sps: framing.sps,
            cc_per_unit: cc,
            cc_per_symbol: per_symbol,
        })
    }

    pub fn framing(&self) -> FramingSpec {
        FramingSpec {
            mode: self.mode,
            k: self.k,
            sps: self.sps,
            n_slices: self.n_slices,
        }
    }

    /// Architecture this realization describes. GRUs use the per-step
    /// readout, which is the one the formula counts.
    pub fn architecture(&self) -> Architecture {
        match self.arch {
            ArchKind::Fnn => Architecture::Fnn,
            ArchKind::Gru => Architecture::Gru {
                variant: GruVariant::Verbatim,
                readout: GruReadout::PerStepMean,
            },
            ArchKind::Cnn => Architecture::Cnn {
                n_w: self.n_w.unwrap_or(self.m),
            },
        }
    }

    /// Weight multiplications counted on an actual forward pass for one unit.
    pub fn instrumented_per_unit(&self, readout: GruReadout) -> Result<usize> {
        let arch = match self.architecture() {
            Architecture::Gru { variant, .. } => Architecture::Gru { variant, readout },
            a => a,
        };
        let net = Network::new(arch, self.m, self.n_slices, self.n_h, Activation::Tanh, Activation::Linear)?;
        let mut tally = MulCounter::default();
        net.forward(&vec![0.0; net.input_len()], &mut tally)?;
        Ok(tally.weight)
    }
}

/// Outcome of fitting an architecture to a budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realization {
    pub budget: usize,
    /// Closest to the budget, ties toward the cheaper side.
    pub selected: Option<ComplexityReport>,
    /// Every candidate within 20% of the budget, ascending by cost.
    pub candidates: Vec<ComplexityReport>,
    pub diagnostic: Option<String>,
}

/// Relative band around the budget in which realizations are listed; a
/// budget is unachievable only when even the cheapest one lies above the band.
pub const TOLERANCE: f64 = 0.2;

/// Largest hidden size searched.
pub const MAX_HIDDEN: usize = 64;

/// Searches `N_h` in `1..=MAX_HIDDEN` at the framing's context `K`; GRUs also
/// search shorter contexts `1..=K`, since one hidden unit at full memory can
/// already exceed small budgets.
pub fn realize_under_budget(arch: ArchKind, framing: FramingSpec, budget: usize) -> Result<Realization> {
    framing.validate()?;
    let contexts: Vec<usize> = match arch {
        ArchKind::Gru => (1..=framing.k.max(1)).collect(),
        _ => vec![framing.k],
    };
    let mut all = Vec::new();
    for &k in &contexts {
        let f = FramingSpec { k, ..framing };
        for n_h in 1..=MAX_HIDDEN {
            all.push(ComplexityReport::new(arch, f, n_h, None)?);
        }
    }
    let key = |r: &ComplexityReport| (r.cc_per_symbol.abs_diff(budget), r.cc_per_symbol > budget, r.k, r.n_h);
    let selected = all.iter().copied().min_by_key(key);
    let cheapest = all.iter().map(|r| r.cc_per_symbol).min().unwrap_or(0);
    let (lo, hi) = (budget as f64 * (1.0 - TOLERANCE), budget as f64 * (1.0 + TOLERANCE));
    if cheapest as f64 > hi {
        return Ok(Realization {
            budget,
            selected: None,
            candidates: Vec::new(),
            diagnostic: Some(format!(
                "budget {budget} is far below the cheapest {} realization ({cheapest})",
                arch.name()
            )),
        });
    }
    let mut candidates: Vec<_> = all
        .into_iter()
        .filter(|r| (lo..=hi).contains(&(r.cc_per_symbol as f64)))
        .collect();
    candidates.sort_by_key(|r| (r.cc_per_symbol, r.k, r.n_h));
    Ok(Realization {
        budget,
        selected,
        candidates,
        diagnostic: None,
    })
}

/// CSV with one row per candidate; the selected one is flagged.
pub fn realization_table(rows: &[(String, Realization)]) -> String {
    let mut s = String::from("equalizer,budget,selected,k,m,n_h,n_w,cc_per_unit,cc_per_symbol\n");
    for (name, r) in rows {
        if r.selected.is_none() {
            writeln!(s, "{name},{},none,,,,,,", r.budget).unwrap();
        }
        let mut listed = r.candidates.clone();
        if let Some(sel) = r.selected {
            if !listed.contains(&sel) {
                listed.push(sel);
            }
        }
        for c in &listed {
            let n_w = c.n_w.map(|w| w.to_string()).unwrap_or_default();
            let flag = if Some(*c) == r.selected { "yes" } else { "no" };
            writeln!(
                s,
                "{name},{},{flag},{},{},{},{n_w},{},{}",
                r.budget, c.k, c.m, c.n_h, c.cc_per_unit, c.cc_per_symbol
            )
            .unwrap();
        }
    }
    s
}
