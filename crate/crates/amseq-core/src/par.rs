//! Data-parallel helpers with a sequential fallback.
//!
//! The crate's scans are embarrassingly parallel over probe indices. With the
//! `parallel` feature (default) they fan out on the rayon pool; without it the
//! same entry points run sequentially. Results are combined orderlessly, so
//! either path yields identical reports.

/// Map `f` over `items` and collect, in parallel when available.
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send + Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(&f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(&f).collect()
    }
}

/// Sequential twin of [`map_collect`], kept unconditionally for benchmarks.
pub fn map_collect_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(&f).collect()
}
