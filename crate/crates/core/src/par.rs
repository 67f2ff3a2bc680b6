//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in index order, and all reductions in the crate
//! sum those ordered results sequentially. Parallel and serial runs are therefore
//! bitwise identical; the serial switch only controls whether worker threads are used.

use std::sync::atomic::{AtomicBool, Ordering};

static SERIAL: AtomicBool = AtomicBool::new(false);

/// Force sequential evaluation for the whole process.
pub fn set_serial(serial: bool) {
    SERIAL.store(serial, Ordering::Relaxed);
}

pub fn is_serial() -> bool {
    SERIAL.load(Ordering::Relaxed) || !cfg!(feature = "parallel")
}

/// `(0..n).map(f).collect()`, in parallel when enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if !is_serial() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indexed`]; the error reported is the lowest-index one.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    let results = map_indexed(n, f);
    results.into_iter().collect()
}

/// Map over a slice, preserving order.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(&items[i]))
}
