//! Worker-count control. Results never depend on the worker count.

use crate::error::{MuskatError, Result};

/// Run `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| MuskatError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}
