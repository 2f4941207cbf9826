//! Thin switch between rayon and sequential iteration. Results are always
//! collected in input order, so outputs are identical across thread counts
//! and with the `parallel` feature disabled.

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Sequential version, kept callable unconditionally for benchmarks.
pub fn map_indexed_seq<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Cap the rayon worker count. No-op without the `parallel` feature.
pub fn limit_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            // Ignore the error if a global pool already exists.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
