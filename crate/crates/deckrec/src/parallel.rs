//! Multi-threaded trace generation with the same output as the serial
//! sampler.

use deckrec_core::channel::{DeletionChannel, Sampler, TraceBatch};
use deckrec_core::Population;
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Draws `count` traces on the rayon pool. Every draw depends only on the
/// seed and its index, so the batch equals `sample_traces` exactly.
pub fn sample_traces_par(population: &Population, channel: &DeletionChannel, count: u64, seed: u64) -> TraceBatch {
    let sampler = Sampler::new(population, channel, seed);
    let traces = (0..count).into_par_iter().map(|i| sampler.trace(i)).collect();
    TraceBatch { n: population.n(), delta: channel.delta(), seed, traces }
}

/// Runs `f` on a pool with `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::config("threads must be positive")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
