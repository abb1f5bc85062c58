//! Execution strategy for the data-parallel inner loops.
//!
//! Every parallel map collects in index order and every reduction is a
//! sequential fold over those ordered partials, so a computation gives the
//! same bits with one worker or many.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Maps `f` over the items of `items`, in order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// Splits `0..n` into fixed chunks of `chunk` indices, computes one
    /// partial per chunk with `part`, and folds the partials left to right.
    pub fn chunked_fold<T, P, C>(self, n: usize, chunk: usize, part: P, init: T, combine: C) -> T
    where
        T: Send,
        P: Fn(std::ops::Range<usize>) -> T + Sync + Send,
        C: Fn(T, T) -> T,
    {
        let chunk = chunk.max(1);
        let n_chunks = n.div_ceil(chunk);
        let partials = self.map(n_chunks, |c| {
            let start = c * chunk;
            part(start..(start + chunk).min(n))
        });
        partials.into_iter().fold(init, combine)
    }
}

/// Chunk length used by ordered reductions over ensembles.
pub const REDUCTION_CHUNK: usize = 4096;
