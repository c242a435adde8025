//! A [`Runner`] backed by a rayon thread pool.

use chlab_core::analysis::Runner;
use rayon::prelude::*;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "CHLAB_THREADS";

pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `threads = 0` picks the number of available cores.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Runner for Pool {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_job_order() {
        let pool = Pool::new(4).unwrap();
        assert_eq!(pool.threads(), 4);
        let out = pool.map(1000, |i| i * i);
        assert_eq!(out, (0..1000).map(|i| i * i).collect::<Vec<_>>());
    }
}
