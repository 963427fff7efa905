//! Data-parallel maps with a sequential fallback.
//!
//! With the `parallel` feature, [`Exec::Parallel`] runs on rayon. Results are
//! always collected in index order, so output is identical in both modes.
//! `SPINOR_MINIMAL_THREADS` caps the worker count.

/// Execution strategy for the scan-style loops of the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Thread cap taken from `SPINOR_MINIMAL_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SPINOR_MINIMAL_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    use std::sync::OnceLock;
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| thread_cap().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok())).as_ref()
}

/// `(0..n).map(f).collect()`, parallel when requested and available.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
            match pool() {
                Some(p) => p.install(run),
                None => run(),
            }
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Parallel map over a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Exec, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}

/// Number of workers a parallel map would use.
pub fn workers(exec: Exec) -> usize {
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => pool().map(|p| p.current_num_threads()).unwrap_or_else(rayon::current_num_threads),
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let a = map_range(Exec::Sequential, 1000, |i| (i * i) % 97);
        let b = map_range(Exec::Parallel, 1000, |i| (i * i) % 97);
        assert_eq!(a, b);
        assert_eq!(a[10], 100 % 97);
    }

    #[test]
    fn slice_map() {
        let v: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let out = map_slice(Exec::default(), &v, |x| 2.0 * x);
        assert_eq!(out[49], 98.0);
    }
}
