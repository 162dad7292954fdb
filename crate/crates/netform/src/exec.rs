//! Work-distribution helpers.
//!
//! Hot loops (per-dyad evaluation, Monte Carlo replications, BIC grid cells)
//! are expressed as index maps that run on rayon when the `parallel` feature
//! is enabled and fall back to a plain sequential loop otherwise. Results are
//! always collected in index order and reduced sequentially afterwards, so
//! numerical output is bit-identical for any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
#[cfg(feature = "parallel")]
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Forces all index maps onto the sequential path even when the `parallel`
/// feature is compiled in. Used by the benchmark suite to compare both modes
/// in one binary; also honored by `--threads 1` in the CLI.
pub fn force_sequential(yes: bool) {
    #[cfg(feature = "parallel")]
    FORCE_SEQUENTIAL.store(yes, Ordering::Relaxed);
    #[cfg(not(feature = "parallel"))]
    let _ = yes;
}

/// True when maps will actually fan out over a thread pool.
pub fn is_parallel() -> bool {
    #[cfg(feature = "parallel")]
    {
        !FORCE_SEQUENTIAL.load(Ordering::Relaxed)
    }
    #[cfg(not(feature = "parallel"))]
    {
        false
    }
}

/// Maps `f` over `0..len`, returning results in index order.
pub(crate) fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Compensated (Neumaier) accumulator for the fixed-order dyad sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
