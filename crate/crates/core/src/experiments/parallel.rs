use crate::error::{Error, Result};

/// Worker-thread count for sweep members; unset or empty uses rayon's default.
pub const THREADS_ENV: &str = "KSCH_THREADS";

pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let raw = raw.trim();
        if !raw.is_empty() {
            let n: usize = raw
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
            builder = builder.num_threads(n);
        }
    }
    builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}
