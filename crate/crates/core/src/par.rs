//! Deterministic data-parallel helpers.
//!
//! Work is split into fixed-size index blocks whose boundaries do not depend
//! on the worker count, and block results are merged left to right. With the
//! `parallel` feature off the same blocks run sequentially, so both builds
//! produce bit-identical floating-point results.

use std::ops::Range;

/// Reps per block. Part of the reproducibility contract: changing it changes
/// the floating-point summation order of every Monte Carlo estimate.
pub const BLOCK_SIZE: u64 = 1024;

fn blocks(count: u64) -> Vec<Range<u64>> {
    (0..count.div_ceil(BLOCK_SIZE))
        .map(|b| b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(count))
        .collect()
}

/// `f(i)` for every `i` in `0..count`, in index order.
pub fn map_indexed<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Folds each fixed block of `0..count` with `fold` starting from `init()`,
/// then merges block accumulators in block order.
pub fn fold_blocks<A, I, F, M>(count: u64, init: I, fold: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, u64) + Sync + Send,
    M: Fn(&mut A, A),
{
    let run = |r: Range<u64>| {
        let mut acc = init();
        for i in r {
            fold(&mut acc, i);
        }
        acc
    };
    #[cfg(feature = "parallel")]
    let partials: Vec<A> = {
        use rayon::prelude::*;
        blocks(count).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<A> = blocks(count).into_iter().map(run).collect();

    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

/// Runs `f` with at most `threads` workers (None = library default). The
/// thread count never affects results.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("failed to build worker pool");
        return pool.install(f);
    }
    let _ = threads;
    f()
}
