//! Independent recomputations shared by the network test targets.
#![allow(dead_code)]

use imdd_eq::dsp::{make_prng, Mt19937};
use imdd_eq::nn::{Activation, Architecture, GruReadout, GruVariant, Network, Workspace};
use rand::Rng;

pub const EPS: f64 = 1e-5;
const KINK_MARGIN: f64 = 1e-3;

fn act(f: Activation, z: f64) -> f64 {
    match f {
        Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        Activation::Tanh => z.tanh(),
        Activation::Relu => {
            if z > 0.0 {
                z
            } else {
                0.0
            }
        }
        Activation::Linear => z,
    }
}

fn tensor<'a>(net: &'a Network, name: &str) -> (&'a [f64], usize) {
    let t = net.tensors().iter().find(|t| t.name == name).unwrap();
    (&net.params()[t.range()], t.cols)
}

/// Hidden pre-activations fed to `f_h`, in evaluation order.
pub fn hidden_preactivations(net: &Network, x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    nested_loops(net, x, &mut out);
    out
}

/// Output recomputed with plain nested loops over the named tensors.
pub fn oracle_forward(net: &Network, x: &[f64]) -> f64 {
    nested_loops(net, x, &mut Vec::new())
}

fn nested_loops(net: &Network, x: &[f64], pre: &mut Vec<f64>) -> f64 {
    let (m, n, nh) = (net.steps(), net.features(), net.n_hidden());
    let fh = net.hidden_activation();
    let o = match net.arch() {
        Architecture::Fnn => {
            let (w, cols) = tensor(net, "W_h");
            let (b, _) = tensor(net, "b_h");
            let (wo, _) = tensor(net, "W_out");
            let mut y = 0.0;
            for j in 0..nh {
                let mut z = b[j];
                for i in 0..m * n {
                    z += w[j * cols + i] * x[i];
                }
                pre.push(z);
                y += wo[j] * act(fh, z);
            }
            y
        }
        Architecture::Gru { variant, readout } => {
            let g = |name| tensor(net, name).0;
            let (wr, ur, br) = (g("W_r"), g("U_r"), g("b_r"));
            let (ws, us, bs) = (g("W_s"), g("U_s"), g("b_s"));
            let (wh, uh, bh) = (g("W_h"), g("U_h"), g("b_h"));
            let (wo, bo) = (g("W_out"), g("b_out")[0]);
            let sign = match variant {
                GruVariant::Verbatim => -1.0,
                GruVariant::Standard => 1.0,
            };
            let mut h = vec![0.0; nh];
            let mut sum = 0.0;
            for t in 0..m {
                let u = &x[t * n..(t + 1) * n];
                let mut next = vec![0.0; nh];
                for j in 0..nh {
                    let (mut zr, mut zs, mut zh, mut c) = (br[j], bs[j], 0.0, bh[j]);
                    for i in 0..n {
                        zr += wr[j * n + i] * u[i];
                        zs += ws[j * n + i] * u[i];
                        zh += wh[j * n + i] * u[i];
                    }
                    for i in 0..nh {
                        zr += ur[j * nh + i] * h[i];
                        zs += us[j * nh + i] * h[i];
                        c += uh[j * nh + i] * h[i];
                    }
                    let r = act(Activation::Sigmoid, zr);
                    let s = act(Activation::Sigmoid, zs);
                    let a = zh + r * c;
                    pre.push(a);
                    next[j] = (1.0 - s) * h[j] + sign * s * act(fh, a);
                }
                h = next;
                for j in 0..nh {
                    sum += wo[j] * h[j];
                }
            }
            match readout {
                GruReadout::FinalState => (0..nh).map(|j| wo[j] * h[j]).sum::<f64>() + bo,
                GruReadout::PerStepMean => sum / m as f64 + bo,
            }
        }
        Architecture::Cnn { n_w } => {
            let (w, cols) = tensor(net, "w");
            let (b, _) = tensor(net, "b");
            let (wo, _) = tensor(net, "W_out");
            let bo = tensor(net, "b_out").0[0];
            let len = m - n_w + 1;
            let mut y = bo;
            for g in 0..nh {
                for i in 0..len {
                    let mut z = b[g];
                    for j in 0..n_w {
                        for f in 0..n {
                            z += w[g * cols + j * n + f] * x[(i + j) * n + f];
                        }
                    }
                    pre.push(z);
                    y += wo[g * len + i] * act(fh, z);
                }
            }
            y
        }
    };
    act(net.output_activation(), o)
}

pub const ACTIVATIONS: [Activation; 4] = [Activation::Sigmoid, Activation::Tanh, Activation::Relu, Activation::Linear];

pub fn gru(variant: GruVariant, readout: GruReadout) -> Architecture {
    Architecture::Gru { variant, readout }
}

/// Random small network (M <= 6, N_h <= 3) with non-zero parameters and a
/// matching input. `kind` selects FNN, GRU or CNN; `arch` overrides it.
pub fn random_instance(arch: Option<Architecture>, kind: usize, rng: &mut Mt19937) -> (Network, Vec<f64>) {
    let m = rng.random_range(1..=6);
    let n = rng.random_range(1..=4);
    let nh = rng.random_range(1..=3);
    let arch = arch.unwrap_or(match kind {
        0 => Architecture::Fnn,
        1 => gru(GruVariant::Verbatim, GruReadout::FinalState),
        _ => Architecture::Cnn {
            n_w: rng.random_range(1..=m),
        },
    });
    let arch = match arch {
        Architecture::Cnn { n_w } if n_w > m => Architecture::Cnn { n_w: m },
        a => a,
    };
    let fh = ACTIVATIONS[rng.random_range(0..4)];
    let fo = if rng.random::<bool>() {
        Activation::Sigmoid
    } else {
        Activation::Linear
    };
    let mut net = Network::new(arch, m, n, nh, fh, fo).unwrap();
    for p in net.params_mut() {
        *p = rng.random_range(-1.0..1.0);
    }
    let x = (0..m * n).map(|_| rng.random_range(-1.5..1.5)).collect();
    (net, x)
}

/// Draws instances until one has no ReLU pre-activation within `margin` of
/// the kink, where finite differences are meaningless.
pub fn smooth_instance(arch: Option<Architecture>, kind: usize, rng: &mut Mt19937) -> (Network, Vec<f64>) {
    loop {
        let (net, x) = random_instance(arch, kind, rng);
        let kinked = net.hidden_activation() == Activation::Relu
            && hidden_preactivations(&net, &x).iter().any(|z| z.abs() < KINK_MARGIN);
        if !kinked {
            return (net, x);
        }
    }
}

/// Largest relative error between backpropagated and central-difference
/// gradients of the output over all parameters.
pub fn gradient_error(net: &Network, x: &[f64]) -> f64 {
    let mut ws = Workspace::default();
    let mut grad = vec![0.0; net.n_params()];
    net.predict(x, &mut ws);
    net.backward(x, 1.0, &mut ws, &mut grad);
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (i, &g) in grad.iter().enumerate() {
        let p = net.params()[i];
        probe.params_mut()[i] = p + EPS;
        let up = oracle_forward(&probe, x);
        probe.params_mut()[i] = p - EPS;
        let down = oracle_forward(&probe, x);
        probe.params_mut()[i] = p;
        let fd = (up - down) / (2.0 * EPS);
        let scale = g.abs().max(fd.abs()).max(1e-6);
        worst = worst.max((g - fd).abs() / scale);
    }
    worst
}

pub fn rng(seed: u64) -> Mt19937 {
    make_prng(seed)
}
