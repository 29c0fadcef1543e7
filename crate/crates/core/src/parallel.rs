//! Data-parallel helpers with a sequential fallback.
//!
//! Monte Carlo replicas and ensemble sweeps are embarrassingly parallel.
//! With the `parallel` feature (default) the work is dispatched through
//! rayon; without it, or with `parallel = false` at the call site, the
//! same closure runs in a plain loop. Results are collected in index
//! order either way, so output is independent of scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sizes the global worker pool. Fails if a pool was already built;
/// without the `parallel` feature this is a no-op.
pub fn configure_threads(n: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        return rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string());
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        Ok(())
    }
}

/// Runs `f(0..n)` and collects the results in index order.
pub fn run_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Maps `f` over mutable chunks of `data`, zipped with the chunk index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, parallel: bool, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    let _ = parallel;
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}
