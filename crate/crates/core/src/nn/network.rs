//! Single-hidden-layer FNN, GRU and 1-D CNN with hand-written backprop.
//!
//! Inputs are time-major frames: `steps` time positions, each carrying
//! `features` values (one per slice). All parameters live in one flat vector;
//! `tensors()` describes the layout.

use super::Activation;
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Sign of the candidate term in the GRU state update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GruVariant {
    /// `h_t = (1 - s_t) h_{t-1} - s_t hc_t`
    Verbatim,
    /// `h_t = (1 - s_t) h_{t-1} + s_t hc_t`
    Standard,
}

impl GruVariant {
    fn sign(self) -> f64 {
        match self {
            GruVariant::Verbatim => -1.0,
            GruVariant::Standard => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GruReadout {
    /// Output layer applied once to the last hidden state.
    FinalState,
    /// Output layer applied at every step, averaged.
    PerStepMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    Fnn,
    Gru { variant: GruVariant, readout: GruReadout },
    Cnn { n_w: usize },
}

/// Multiplication accounting hook for forward passes.
pub trait Tally {
    /// `n` multiplications of an input or state by a trained weight.
    fn weights(&mut self, n: usize);
    /// `n` element-wise products between activations (GRU gating).
    fn elementwise(&mut self, n: usize);
}

pub struct NoTally;

impl Tally for NoTally {
    #[inline(always)]
    fn weights(&mut self, _: usize) {}
    #[inline(always)]
    fn elementwise(&mut self, _: usize) {}
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct MulCounter {
    pub weight: usize,
    pub elementwise: usize,
}

impl Tally for MulCounter {
    fn weights(&mut self, n: usize) {
        self.weight += n;
    }
    fn elementwise(&mut self, n: usize) {
        self.elementwise += n;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorInfo {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

// tensor slots
const FNN_W: usize = 0;
const FNN_B: usize = 1;
const FNN_OUT: usize = 2;
const GRU_WR: usize = 0;
const GRU_UR: usize = 1;
const GRU_BR: usize = 2;
const GRU_WS: usize = 3;
const GRU_US: usize = 4;
const GRU_BS: usize = 5;
const GRU_WH: usize = 6;
const GRU_UH: usize = 7;
const GRU_BH: usize = 8;
const GRU_OUT: usize = 9;
const GRU_BOUT: usize = 10;
const CNN_W: usize = 0;
const CNN_B: usize = 1;
const CNN_OUT: usize = 2;
const CNN_BOUT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    arch: Architecture,
    steps: usize,
    features: usize,
    n_h: usize,
    f_h: Activation,
    f_out: Activation,
    tensors: Vec<TensorInfo>,
    params: Vec<f64>,
}

/// Per-evaluation caches reused across calls.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    z: Vec<f64>,
    a: Vec<f64>,
    hist: Vec<f64>,
    r: Vec<f64>,
    s: Vec<f64>,
    c: Vec<f64>,
    ah: Vec<f64>,
    hc: Vec<f64>,
    dh: Vec<f64>,
    dhp: Vec<f64>,
    out_pre: f64,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Network {
    /// All-zero parameters.
    pub fn new(
        arch: Architecture,
        steps: usize,
        features: usize,
        n_h: usize,
        f_h: Activation,
        f_out: Activation,
    ) -> Result<Self> {
        if steps == 0 || features == 0 || n_h == 0 {
            return Err(Error::config("memory, feature count and hidden size must be >= 1"));
        }
        if let Architecture::Cnn { n_w } = arch {
            if n_w == 0 || n_w > steps {
                return Err(Error::config(format!("filter width {n_w} must lie in 1..={steps}")));
            }
        }
        let mut shapes: Vec<(&'static str, usize, usize)> = Vec::new();
        match arch {
            Architecture::Fnn => {
                shapes.push(("W_h", n_h, steps * features));
                shapes.push(("b_h", n_h, 1));
                shapes.push(("W_out", 1, n_h));
            }
            Architecture::Gru { .. } => {
                for (w, u, b) in [("W_r", "U_r", "b_r"), ("W_s", "U_s", "b_s"), ("W_h", "U_h", "b_h")] {
                    shapes.push((w, n_h, features));
                    shapes.push((u, n_h, n_h));
                    shapes.push((b, n_h, 1));
                }
                shapes.push(("W_out", 1, n_h));
                shapes.push(("b_out", 1, 1));
            }
            Architecture::Cnn { n_w } => {
                shapes.push(("w", n_h, n_w * features));
                shapes.push(("b", n_h, 1));
                shapes.push(("W_out", 1, n_h * (steps - n_w + 1)));
                shapes.push(("b_out", 1, 1));
            }
        }
        let mut offset = 0;
        let tensors: Vec<TensorInfo> = shapes
            .into_iter()
            .map(|(name, rows, cols)| {
                let t = TensorInfo {
                    name,
                    rows,
                    cols,
                    offset,
                };
                offset += rows * cols;
                t
            })
            .collect();
        Ok(Network {
            arch,
            steps,
            features,
            n_h,
            f_h,
            f_out,
            tensors,
            params: vec![0.0; offset],
        })
    }

    pub fn arch(&self) -> Architecture {
        self.arch
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn n_hidden(&self) -> usize {
        self.n_h
    }

    pub fn input_len(&self) -> usize {
        self.steps * self.features
    }

    pub fn hidden_activation(&self) -> Activation {
        self.f_h
    }

    pub fn output_activation(&self) -> Activation {
        self.f_out
    }

    pub fn tensors(&self) -> &[TensorInfo] {
        &self.tensors
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Replaces all parameters; the length must match the layout.
    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                got: params.len(),
            });
        }
        self.params = params;
        Ok(())
    }

    fn t(&self, slot: usize) -> &[f64] {
        &self.params[self.tensors[slot].range()]
    }

    fn row(&self, slot: usize, j: usize) -> &[f64] {
        let t = &self.tensors[slot];
        &self.params[t.offset + j * t.cols..t.offset + (j + 1) * t.cols]
    }

    /// Weights uniform in `+-sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init_glorot<R: Rng>(&mut self, rng: &mut R) {
        let (n, nh) = (self.features, self.n_h);
        let fans: Vec<Option<(usize, usize)>> = match self.arch {
            Architecture::Fnn => vec![Some((self.steps * n, nh)), None, Some((nh, 1))],
            Architecture::Gru { .. } => {
                let mut v = Vec::new();
                for _ in 0..3 {
                    v.extend([Some((n, nh)), Some((nh, nh)), None]);
                }
                v.extend([Some((nh, 1)), None]);
                v
            }
            Architecture::Cnn { n_w } => vec![
                Some((n_w * n, n_w * nh)),
                None,
                Some((nh * (self.steps - n_w + 1), 1)),
                None,
            ],
        };
        for (t, fan) in self.tensors.iter().zip(fans) {
            let range = t.range();
            match fan {
                Some((fi, fo)) => {
                    let bound = (6.0 / (fi + fo) as f64).sqrt();
                    for p in &mut self.params[range] {
                        *p = rng.random_range(-bound..bound);
                    }
                }
                None => self.params[range].iter_mut().for_each(|p| *p = 0.0),
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::Dimension {
                expected: self.input_len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Output for one frame, with multiplication accounting.
    pub fn forward<T: Tally>(&self, x: &[f64], tally: &mut T) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.run(x, &mut Workspace::default(), tally))
    }

    /// Output for one frame without shape checks; fills `ws` for `backward`.
    pub fn predict(&self, x: &[f64], ws: &mut Workspace) -> f64 {
        debug_assert_eq!(x.len(), self.input_len());
        self.run(x, ws, &mut NoTally)
    }

    fn run<T: Tally>(&self, x: &[f64], ws: &mut Workspace, tally: &mut T) -> f64 {
        let o = match self.arch {
            Architecture::Fnn => self.run_fnn(x, ws, tally),
            Architecture::Gru { variant, readout } => self.run_gru(x, ws, tally, variant, readout),
            Architecture::Cnn { n_w } => self.run_cnn(x, ws, tally, n_w),
        };
        ws.out_pre = o;
        self.f_out.apply(o)
    }

    fn run_fnn<T: Tally>(&self, x: &[f64], ws: &mut Workspace, tally: &mut T) -> f64 {
        let nh = self.n_h;
        ws.z.resize(nh, 0.0);
        ws.a.resize(nh, 0.0);
        let b = self.t(FNN_B);
        for j in 0..nh {
            let z = dot(self.row(FNN_W, j), x) + b[j];
            ws.z[j] = z;
            ws.a[j] = self.f_h.apply(z);
        }
        tally.weights(nh * x.len());
        tally.weights(nh);
        dot(self.t(FNN_OUT), &ws.a)
    }

    fn run_gru<T: Tally>(
        &self,
        x: &[f64],
        ws: &mut Workspace,
        tally: &mut T,
        variant: GruVariant,
        readout: GruReadout,
    ) -> f64 {
        let (n, nh, m) = (self.features, self.n_h, self.steps);
        let sign = variant.sign();
        for buf in [&mut ws.r, &mut ws.s, &mut ws.c, &mut ws.ah, &mut ws.hc] {
            buf.resize(m * nh, 0.0);
        }
        ws.hist.clear();
        ws.hist.resize((m + 1) * nh, 0.0);
        let (br, bs, bh) = (self.t(GRU_BR), self.t(GRU_BS), self.t(GRU_BH));
        let w_out = self.t(GRU_OUT);
        let mut acc = 0.0;
        for t in 0..m {
            let u = &x[t * n..(t + 1) * n];
            let (prev, next) = ws.hist.split_at_mut((t + 1) * nh);
            let hp = &prev[t * nh..];
            let hn = &mut next[..nh];
            for j in 0..nh {
                let k = t * nh + j;
                let r = sigmoid(dot(self.row(GRU_WR, j), u) + dot(self.row(GRU_UR, j), hp) + br[j]);
                let s = sigmoid(dot(self.row(GRU_WS, j), u) + dot(self.row(GRU_US, j), hp) + bs[j]);
                let c = dot(self.row(GRU_UH, j), hp) + bh[j];
                let ah = dot(self.row(GRU_WH, j), u) + r * c;
                let hc = self.f_h.apply(ah);
                ws.r[k] = r;
                ws.s[k] = s;
                ws.c[k] = c;
                ws.ah[k] = ah;
                ws.hc[k] = hc;
                hn[j] = (1.0 - s) * hp[j] + sign * s * hc;
            }
            tally.weights(3 * nh * n + 3 * nh * nh);
            tally.elementwise(3 * nh);
            if readout == GruReadout::PerStepMean {
                acc += dot(w_out, hn);
                tally.weights(nh);
            }
        }
        let b_out = self.t(GRU_BOUT)[0];
        match readout {
            GruReadout::FinalState => {
                tally.weights(nh);
                dot(w_out, &ws.hist[m * nh..]) + b_out
            }
            GruReadout::PerStepMean => acc / m as f64 + b_out,
        }
    }

    fn run_cnn<T: Tally>(&self, x: &[f64], ws: &mut Workspace, tally: &mut T, n_w: usize) -> f64 {
        let (n, nh) = (self.features, self.n_h);
        let len = self.steps - n_w + 1;
        ws.z.resize(nh * len, 0.0);
        ws.a.resize(nh * len, 0.0);
        let b = self.t(CNN_B);
        for g in 0..nh {
            let w = self.row(CNN_W, g);
            for i in 0..len {
                let z = dot(w, &x[i * n..(i + n_w) * n]) + b[g];
                ws.z[g * len + i] = z;
                ws.a[g * len + i] = self.f_h.apply(z);
            }
        }
        tally.weights(nh * len * n_w * n);
        tally.weights(nh * len);
        dot(self.t(CNN_OUT), &ws.a) + self.t(CNN_BOUT)[0]
    }

    /// Accumulates `dy * d(output)/d(params)` into `grad`, using the caches
    /// left in `ws` by the last `predict` on the same `x`.
    pub fn backward(&self, x: &[f64], dy: f64, ws: &mut Workspace, grad: &mut [f64]) {
        let y = self.f_out.apply(ws.out_pre);
        let go = dy * self.f_out.derivative(ws.out_pre, y);
        match self.arch {
            Architecture::Fnn => self.back_fnn(x, go, ws, grad),
            Architecture::Gru { variant, readout } => self.back_gru(x, go, ws, grad, variant, readout),
            Architecture::Cnn { n_w } => self.back_cnn(x, go, ws, grad, n_w),
        }
    }

    fn back_fnn(&self, x: &[f64], go: f64, ws: &Workspace, grad: &mut [f64]) {
        let nh = self.n_h;
        let (tw, tb, to) = (&self.tensors[FNN_W], &self.tensors[FNN_B], &self.tensors[FNN_OUT]);
        let w_out = self.t(FNN_OUT);
        for j in 0..nh {
            grad[to.offset + j] += go * ws.a[j];
            let gz = go * w_out[j] * self.f_h.derivative(ws.z[j], ws.a[j]);
            grad[tb.offset + j] += gz;
            let row = tw.offset + j * tw.cols;
            axpy(&mut grad[row..row + tw.cols], gz, x);
        }
    }

    fn back_cnn(&self, x: &[f64], go: f64, ws: &Workspace, grad: &mut [f64], n_w: usize) {
        let (n, nh) = (self.features, self.n_h);
        let len = self.steps - n_w + 1;
        let (tw, tb, to, tbo) = (
            &self.tensors[CNN_W],
            &self.tensors[CNN_B],
            &self.tensors[CNN_OUT],
            &self.tensors[CNN_BOUT],
        );
        let w_out = self.t(CNN_OUT);
        grad[tbo.offset] += go;
        for g in 0..nh {
            let row = tw.offset + g * tw.cols;
            for i in 0..len {
                let k = g * len + i;
                grad[to.offset + k] += go * ws.a[k];
                let gz = go * w_out[k] * self.f_h.derivative(ws.z[k], ws.a[k]);
                grad[tb.offset + g] += gz;
                axpy(&mut grad[row..row + tw.cols], gz, &x[i * n..(i + n_w) * n]);
            }
        }
    }

    fn back_gru(
        &self,
        x: &[f64],
        go: f64,
        ws: &mut Workspace,
        grad: &mut [f64],
        variant: GruVariant,
        readout: GruReadout,
    ) {
        let (n, nh, m) = (self.features, self.n_h, self.steps);
        let sign = variant.sign();
        let tn = |slot: usize| &self.tensors[slot];
        let w_out = self.t(GRU_OUT);
        grad[tn(GRU_BOUT).offset] += go;
        ws.dh.clear();
        ws.dh.resize(nh, 0.0);
        ws.dhp.resize(nh, 0.0);
        let step_go = go / m as f64;
        if readout == GruReadout::FinalState {
            axpy(&mut grad[tn(GRU_OUT).range()], go, &ws.hist[m * nh..]);
            axpy(&mut ws.dh, go, w_out);
        }
        for t in (0..m).rev() {
            if readout == GruReadout::PerStepMean {
                axpy(&mut grad[tn(GRU_OUT).range()], step_go, &ws.hist[(t + 1) * nh..(t + 2) * nh]);
                axpy(&mut ws.dh, step_go, w_out);
            }
            let u = &x[t * n..(t + 1) * n];
            let hp = &ws.hist[t * nh..(t + 1) * nh];
            ws.dhp.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..nh {
                let k = t * nh + j;
                let (r, s, c, hc) = (ws.r[k], ws.s[k], ws.c[k], ws.hc[k]);
                let dh = ws.dh[j];
                let dhc = dh * sign * s;
                let ds = dh * (sign * hc - hp[j]);
                ws.dhp[j] += dh * (1.0 - s);

                let dah = dhc * self.f_h.derivative(ws.ah[k], hc);
                let dr = dah * c;
                let dc = dah * r;
                let dar = dr * r * (1.0 - r);
                let das = ds * s * (1.0 - s);
                for (dz, ws_slot, us_slot, bs_slot, with_u) in [
                    (dah, GRU_WH, usize::MAX, usize::MAX, true),
                    (dc, usize::MAX, GRU_UH, GRU_BH, false),
                    (dar, GRU_WR, GRU_UR, GRU_BR, true),
                    (das, GRU_WS, GRU_US, GRU_BS, true),
                ] {
                    if with_u {
                        let tw = tn(ws_slot);
                        let row = tw.offset + j * tw.cols;
                        axpy(&mut grad[row..row + n], dz, u);
                    }
                    if us_slot != usize::MAX {
                        let tu = tn(us_slot);
                        let row = tu.offset + j * nh;
                        axpy(&mut grad[row..row + nh], dz, hp);
                        grad[tn(bs_slot).offset + j] += dz;
                        axpy(&mut ws.dhp, dz, self.row(us_slot, j));
                    }
                }
            }
            std::mem::swap(&mut ws.dh, &mut ws.dhp);
        }
    }
}
