//! Experiment orchestration: configuration, seeded sweeps and result files.

pub mod config;
pub mod output;
pub mod plot;
pub mod receivers;
pub mod seed;
pub mod sweep;

pub use config::{EqualizerEntry, ExperimentConfig, Layout, Profile, SplitCounts};
pub use receivers::{Channel, Receiver};
pub use sweep::{Experiment, Record, SweepResult};

/// Runs `f` on a pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n.max(1));
    }
    let pool = b.build().map_err(|e| crate::Error::config(e.to_string()))?;
    Ok(pool.install(f))
}
