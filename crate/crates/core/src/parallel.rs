//! Trial-level data parallelism.
//!
//! With the `parallel` feature (on by default) trials are spread across a
//! rayon pool; without it every [`Execution`] runs sequentially. Results are
//! always returned in trial-index order, so as long as each trial draws only
//! from its own stream the output does not depend on the worker count.

use std::ops::Range;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `workers: None` uses the global rayon pool.
    #[default]
    Parallel,
    ParallelWith { workers: usize },
}

impl Execution {
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(1) => Execution::Sequential,
            Some(w) => Execution::ParallelWith { workers: w },
            None => Execution::Parallel,
        }
    }
}

/// Maps `f` over every trial index in `range`, preserving index order.
pub fn map_trials<T, F>(range: Range<u64>, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => range.map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            range.into_par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::ParallelWith { workers } => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => pool.install(|| range.into_par_iter().map(&f).collect()),
                Err(_) => range.map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        _ => range.map(f).collect(),
    }
}
