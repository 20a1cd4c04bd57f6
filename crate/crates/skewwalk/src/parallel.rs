//! The worker pool and deterministic parallel maps.
//!
//! Every map is indexed: item `i` is computed from `i` alone (its own RNG
//! streams) and results are collected in index order, so output does not
//! depend on the number of workers.

use rayon::prelude::*;

use crate::{Error, Result};

#[derive(Debug)]
pub struct Pool {
    inner: rayon::ThreadPool,
}

impl Pool {
    /// `workers = 0` uses one thread per available core.
    pub fn new(workers: usize) -> Result<Self> {
        let inner = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Pool(e.to_string()))?;
        Ok(Self { inner })
    }

    pub fn workers(&self) -> usize {
        self.inner.current_num_threads()
    }

    /// `[f(0), …, f(n-1)]`.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        self.inner.install(|| (0..n as u64).into_par_iter().map(&f).collect())
    }

    /// `[f(&items[0]), …]` in order.
    pub fn map_items<I, T, F>(&self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync,
    {
        self.inner.install(|| items.par_iter().map(&f).collect())
    }
}
