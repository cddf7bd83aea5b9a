//! Parallel/sequential kernel selection.
//!
//! Every data-parallel hot path in the crate is written twice: a plain
//! sequential loop (always compiled) and a rayon version (behind the
//! `parallel` feature). [`Parallelism`] picks between them at runtime, so a
//! benchmark built with the feature enabled can still measure the sequential
//! kernels. Results are bitwise independent of the choice: parallel maps
//! preserve element order, and parallel reductions combine fixed chunks in
//! index order.

/// Which kernel family to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Plain sequential loops.
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// rayon work-stealing loops (falls back to sequential when the crate
    /// was built without the `parallel` feature).
    #[cfg_attr(feature = "parallel", default)]
    Rayon,
}

/// Order-preserving map over an index range.
pub fn par_map<T, F>(par: Parallelism, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Rayon {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..len).map(f).collect()
}

/// Order-preserving map over a slice.
pub fn par_map_slice<'a, S, T, F>(par: Parallelism, items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Rayon {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}

/// Deterministic chunked sum of `f(0..len)` into an accumulator vector.
///
/// The index range is split into fixed chunks; each chunk is reduced
/// sequentially in index order into its own fresh accumulator, and chunk
/// accumulators are folded left-to-right. The fold order depends only on
/// `len` and `chunk`, so the float result is identical for the sequential
/// and rayon paths and for any worker count. Chunks are processed in
/// bounded batches so at most a batch of accumulators is live at a time.
pub fn par_chunk_sum<A, F>(par: Parallelism, len: usize, chunk: usize, init: A, f: F) -> A
where
    A: Send + Sync + Clone + Add0,
    F: Fn(&mut A, std::ops::Range<usize>) + Sync + Send,
{
    const BATCH: usize = 64;
    let chunk = chunk.max(1);
    let ranges: Vec<std::ops::Range<usize>> = (0..len)
        .step_by(chunk)
        .map(|s| s..(s + chunk).min(len))
        .collect();
    let mut total = init.clone();
    for batch in ranges.chunks(BATCH) {
        let partials: Vec<A> = par_map_slice(par, batch, |r| {
            let mut acc = init.clone();
            f(&mut acc, r.clone());
            acc
        });
        for p in partials {
            total.add_assign0(p);
        }
    }
    total
}

/// Accumulator trait for [`par_chunk_sum`].
pub trait Add0 {
    fn add_assign0(&mut self, other: Self);
}

impl Add0 for Vec<num_complex::Complex64> {
    fn add_assign0(&mut self, other: Self) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
    }
}

impl Add0 for Vec<crate::algebra::GaussInt> {
    fn add_assign0(&mut self, other: Self) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.iter_mut().zip(other) {
            *a = a.add(&b);
        }
    }
}
