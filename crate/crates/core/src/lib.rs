//! Sliced-spectrum IM/DD link simulation with samples-to-sample and
//! samples-to-symbol neural equalizers.

pub mod complexity;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod link;
pub mod nn;
pub mod rx;

pub use error::{Error, Result};
