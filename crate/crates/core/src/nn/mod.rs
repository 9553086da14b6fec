//! Neural equalizers: input framing, network kernels, training and inference.

mod framing;
mod network;
mod serialize;
mod train;

pub use framing::{Framer, FramingMode, FramingSpec};
pub use network::{
    Architecture, GruReadout, GruVariant, MulCounter, Network, NoTally, Tally, TensorInfo, Workspace,
};
pub use train::{
    equalize, equalizer_outputs, train, EpochLoss, EqualizerSpec, LinkCapture, Optimizer, Split, TrainedModel,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
    /// Identity map.
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    /// Derivative at pre-activation `z`, given `a = apply(z)`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}
