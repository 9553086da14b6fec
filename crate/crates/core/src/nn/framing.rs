//! Sliding-window input frames for the sample-output (Sa) and
//! symbol-output (Sy) equalizers.

use crate::error::{Error, Result};
use crate::link::SlicedSignal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FramingMode {
    /// One output per received sample.
    Sa,
    /// One output per symbol.
    Sy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramingSpec {
    pub mode: FramingMode,
    /// Symbols of context on each side.
    pub k: usize,
    pub sps: usize,
    pub n_slices: usize,
}

impl FramingSpec {
    pub fn sa(k: usize, sps: usize, n_slices: usize) -> Self {
        FramingSpec {
            mode: FramingMode::Sa,
            k,
            sps,
            n_slices,
        }
    }

    pub fn sy(k: usize, sps: usize, n_slices: usize) -> Self {
        FramingSpec {
            mode: FramingMode::Sy,
            k,
            sps,
            n_slices,
        }
    }

    /// Width of the unit being equalized.
    pub fn q(&self) -> usize {
        match self.mode {
            FramingMode::Sa => 1,
            FramingMode::Sy => self.sps,
        }
    }

    /// One-sided context in samples.
    pub fn l(&self) -> usize {
        self.k * self.sps
    }

    /// Input memory in samples, `2 L + q`.
    pub fn m(&self) -> usize {
        2 * self.l() + self.q()
    }

    pub fn frame_len(&self) -> usize {
        self.m() * self.n_slices
    }

    pub fn validate(&self) -> Result<()> {
        if self.sps == 0 || self.n_slices == 0 {
            return Err(Error::config("framing needs sps >= 1 and n_slices >= 1"));
        }
        Ok(())
    }
}

/// Sample-interleaved copy of a sliced signal from which frames are cut
/// without copying.
#[derive(Debug, Clone)]
pub struct Framer {
    spec: FramingSpec,
    data: Vec<f64>,
    n_samples: usize,
    alignment: usize,
}

impl Framer {
    /// `signal` must already be at `spec.sps` samples per symbol.
    pub fn new(signal: &SlicedSignal, spec: FramingSpec) -> Result<Self> {
        spec.validate()?;
        if signal.sps() != spec.sps {
            return Err(Error::config(format!(
                "framing expects {} samples/symbol, signal has {}",
                spec.sps,
                signal.sps()
            )));
        }
        if signal.n_slices() != spec.n_slices {
            return Err(Error::Dimension {
                expected: spec.n_slices,
                got: signal.n_slices(),
            });
        }
        Ok(Framer {
            spec,
            data: signal.interleaved(),
            n_samples: signal.len(),
            alignment: signal.symbol_alignment(),
        })
    }

    /// Replaces the sample values (e.g. after normalization) keeping geometry.
    pub fn map_values(&mut self, f: impl Fn(usize, f64) -> f64) {
        let n = self.spec.n_slices;
        for (i, v) in self.data.iter_mut().enumerate() {
            *v = f(i % n, *v);
        }
    }

    pub fn spec(&self) -> &FramingSpec {
        &self.spec
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn alignment(&self) -> usize {
        self.alignment
    }

    /// Values of slice `j` at every sample.
    pub fn slice_values(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.spec.n_slices).copied()
    }

    fn window(&self, index: usize, start: isize) -> Result<&[f64]> {
        let m = self.spec.m() as isize;
        let end = start + m;
        if start < 0 || end as usize > self.n_samples {
            return Err(Error::Boundary {
                index,
                start,
                end,
                len: self.n_samples,
            });
        }
        let n = self.spec.n_slices;
        Ok(&self.data[start as usize * n..end as usize * n])
    }

    /// First sample of the Sa frame centered on sample `k`.
    pub fn sa_start(&self, k: usize) -> isize {
        k as isize - self.spec.l() as isize
    }

    /// First sample of the Sy frame for symbol `t`: the `sps` samples of the
    /// symbol start half a symbol before its center.
    pub fn sy_start(&self, t: usize) -> isize {
        let s = &self.spec;
        (self.alignment + t * s.sps) as isize - (s.sps / 2) as isize - s.l() as isize
    }

    /// `[x_{k-L}, .., x_k, .., x_{k+L}]`, each `x` carrying all slices.
    pub fn frame_sa(&self, k: usize) -> Result<&[f64]> {
        if self.spec.mode != FramingMode::Sa {
            return Err(Error::config("frame_sa on a symbol-output framing"));
        }
        self.window(k, self.sa_start(k))
    }

    /// `[x_{t-K}, .., x_t, .., x_{t+K}]` where each `x` is the group of
    /// `sps` samples of one symbol.
    pub fn frame_sy(&self, t: usize) -> Result<&[f64]> {
        if self.spec.mode != FramingMode::Sy {
            return Err(Error::config("frame_sy on a sample-output framing"));
        }
        self.window(t, self.sy_start(t))
    }

    /// Frame for output unit `i` (a sample for Sa, a symbol for Sy).
    pub fn frame(&self, i: usize) -> Result<&[f64]> {
        match self.spec.mode {
            FramingMode::Sa => self.frame_sa(i),
            FramingMode::Sy => self.frame_sy(i),
        }
    }

    /// Unchecked variant for indices already known to be in range.
    pub(crate) fn frame_at(&self, i: usize) -> &[f64] {
        let start = match self.spec.mode {
            FramingMode::Sa => self.sa_start(i),
            FramingMode::Sy => self.sy_start(i),
        } as usize;
        let n = self.spec.n_slices;
        &self.data[start * n..(start + self.spec.m()) * n]
    }
}
