//! Execution strategy for the data-parallel loops.
//!
//! With the `parallel` feature (default) work can be spread over a rayon
//! pool; without it everything runs on the calling thread. Output order is
//! the input order in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Worker threads available to this strategy.
    pub fn threads(self) -> usize {
        match self {
            Exec::Sequential => 1,
            #[cfg(feature = "parallel")]
            Exec::Parallel => rayon::current_num_threads(),
        }
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
        }
    }

    pub fn for_each_mut<T, F>(self, items: &mut [T], f: F)
    where
        T: Send,
        F: Fn(&mut T) + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter_mut().for_each(f),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter_mut().for_each(f),
        }
    }
}

/// Runs `f` with at most `jobs` worker threads. `jobs = 0` means the rayon
/// default; without the `parallel` feature `jobs` is ignored.
pub fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if jobs > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}
