//! Index-parallel map with a sequential fallback.
//!
//! Results are returned in index order whichever path runs, so callers that
//! derive all randomness from the index get identical output either way.

/// How to run an index map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Rayon's global pool when the `parallel` feature is on, else sequential.
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// `(0..n).map(f)` on the default executor.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_with(Exec::default(), n, f)
}

/// `(0..n).map(f)` on the given executor.
pub fn map_indexed_with<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
