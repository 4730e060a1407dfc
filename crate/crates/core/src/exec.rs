//! Execution mode for the data-parallel loops of the crate.
//!
//! With the `parallel` feature (on by default) indexed maps run on the rayon
//! pool; without it, or when the process-wide mode is switched to
//! [`Exec::Sequential`], they run on the calling thread. Both paths collect in
//! index order, so results are bit-identical regardless of mode or thread count.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

impl Exec {
    /// The mode currently used by the crate's internal loops.
    pub fn current() -> Exec {
        match MODE.load(Ordering::Relaxed) {
            0 => Exec::Sequential,
            _ => Exec::Parallel,
        }
    }

    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Sets the process-wide execution mode and returns the previous one.
pub fn set_mode(mode: Exec) -> Exec {
    let prev = Exec::current();
    MODE.store(
        match mode {
            Exec::Sequential => 0,
            Exec::Parallel => 1,
        },
        Ordering::Relaxed,
    );
    prev
}

/// Runs `f` with the given mode, restoring the previous mode afterwards.
pub fn with_mode<R>(mode: Exec, f: impl FnOnce() -> R) -> R {
    let prev = set_mode(mode);
    let out = f();
    set_mode(prev);
    out
}

/// `(0..n).map(f).collect()`, in parallel when enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if Exec::current() == Exec::Parallel && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Parallel map over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(items.len(), |i| f(&items[i]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = with_mode(Exec::Sequential, || map_indexed(1000, f));
        let b = with_mode(Exec::Parallel, || map_indexed(1000, f));
        assert_eq!(a, b);
    }
}
