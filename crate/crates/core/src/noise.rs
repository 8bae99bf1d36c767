//! Reproducible Wiener increments.
//!
//! Every trajectory draws from its own ChaCha8 stream: the generator is keyed
//! by the run's master seed and the stream number is the trajectory index.
//! A trajectory's noise therefore depends only on `(master, index)`, never on
//! how trajectories are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies the noise stream of a single trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseSeed {
    pub master: u64,
    pub stream: u64,
}

impl NoiseSeed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// `steps` i.i.d. increments `dW_k ~ Normal(0, dt)`.
pub fn wiener_increments(seed: NoiseSeed, steps: usize, dt: f64) -> Vec<f64> {
    let mut rng = seed.rng();
    let scale = dt.sqrt();
    (0..steps)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect()
}

/// Sums consecutive blocks of `factor` increments: the same Brownian path
/// sampled on a mesh `factor` times coarser.
pub fn coarsen_increments(fine: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor == 0 || !fine.len().is_multiple_of(factor) {
        return Err(Error::MeshMismatch(format!(
            "cannot coarsen {} increments by a factor of {factor}",
            fine.len()
        )));
    }
    Ok(fine.chunks_exact(factor).map(|c| c.iter().sum()).collect())
}
