//! Thread-pool control. All parallel loops in the crate are order-preserving
//! maps, so results are identical for every pool width.

use std::sync::Once;

use crate::error::{Error, Result};

/// Environment variable capping the global pool width.
pub const THREADS_ENV: &str = "ARTBH_THREADS";

static INIT: Once = Once::new();

/// Width requested through `ARTBH_THREADS`, if set and valid.
pub fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Configure the global rayon pool from `ARTBH_THREADS` (once per process).
/// A pool built earlier by someone else is left alone.
pub fn init_global_pool() -> Result<()> {
    let n = env_threads()?;
    INIT.call_once(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            b = b.num_threads(n);
        }
        let _ = b.build_global();
    });
    Ok(())
}

/// Run `f` on a dedicated pool of `n` threads.
pub fn with_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Hardware parallelism, at least 1.
pub fn max_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
