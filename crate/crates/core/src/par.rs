//! Execution policy for batch work.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on the rayon
//! global pool. Without it every call falls back to the sequential path. All
//! helpers here preserve input order, so results never depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build actually runs [`Exec::Parallel`] in parallel.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Order-preserving map over a slice.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Fallible order-preserving map; the error reported is that of the lowest index.
pub fn try_map_range<R, E, F>(exec: Exec, n: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    map_range(exec, n, f).into_iter().collect()
}

/// Maximum of `f(i)` over `0..n`, or `None` when `n == 0`. NaN inputs are ignored.
pub fn max_range<F>(exec: Exec, n: usize, f: F) -> Option<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let pick = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    };
    let lift = |v: f64| if v.is_nan() { None } else { Some(v) };
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().map(|i| lift(f(i))).reduce(|| None, pick),
        _ => (0..n).map(|i| lift(f(i))).fold(None, pick),
    }
}
