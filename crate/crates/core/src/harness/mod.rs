//! Classical extraction, simulation and quantitative experiments.
//!
//! Adversaries are ordinary strategy objects (`WCommitterStrategy`,
//! `ScCommitterStrategy`, `EcnpVerifier`). All their randomness lives in
//! owned RNG state, so a `clone` is an exact snapshot and rewinding is
//! restoring a clone.

pub mod bounds;
pub mod extract;
pub mod graph;
pub mod simulate;
pub mod suite;

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

pub use bounds::{serfling_bound, serfling_experiment, unruh_bound_experiment, SerflingRow, UnruhReport, UnruhState, UnruhStrategy};
pub use extract::{simless_extract, simless_finish, simless_prepare, strong_extract, strong_extract_with, SimlessOutcome, SimlessPoint, StrongExtraction};
pub use graph::{graph_analyze, soundness_experiment, subset_miss_probability, InconsistencyGraph, SoundnessReport};
pub use simulate::{chi_square_uniform, mpc_simulate, zk_experiment, zk_simulate_prove, zk_support_check, SupportReport, ZkReport, ZkSimulation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Slackness: the simulator retries at most ⌈1/ε⌉ times.
    pub epsilon: f64,
    /// Extraction threshold.
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { epsilon: 0.05, delta: 0.1, trials: 1000, seed: 0 }
    }
}

impl ExperimentConfig {
    pub fn new(epsilon: f64, delta: f64, trials: usize, seed: u64) -> Result<Self> {
        let c = ExperimentConfig { epsilon, delta, trials, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return param(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return param(format!("delta must lie in (0, 1], got {}", self.delta));
        }
        if self.trials == 0 {
            return param("trials must be at least 1");
        }
        Ok(())
    }

    pub fn retries(&self) -> usize {
        (1.0 / self.epsilon).ceil() as usize
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The RNG of trial `trial`: its own ChaCha stream under the experiment seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials in parallel and counts the true ones.
/// The count depends only on the seed, not on scheduling.
pub fn count_trials(seed: u64, trials: usize, f: impl Fn(u64, &mut ChaCha20Rng) -> Result<bool> + Sync) -> Result<usize> {
    (0..trials as u64).into_par_iter().map(|i| f(i, &mut trial_rng(seed, i)).map(usize::from)).try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Writes rows as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Session(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Session(format!("csv: {e}")))
}

pub fn write_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Session(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::Session(format!("{}: {e}", path.display())))
}
