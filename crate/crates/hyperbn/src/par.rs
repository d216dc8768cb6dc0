//! Data-parallel map helpers.
//!
//! With the `parallel` feature the [`Exec::Parallel`] mode runs on the rayon
//! global pool (or whichever pool the caller installed). Without the feature
//! every mode runs sequentially, so results never depend on the feature set.
//! Output order always follows input order.

/// Execution mode for a data-parallel loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

/// Map `f` over `0..len`, preserving index order.
pub fn map_range<R, F>(exec: Exec, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

/// Map `f` over a slice, preserving order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}

/// Whether this build can actually run loops in parallel.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
