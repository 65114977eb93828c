//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature off, [`Exec::Parallel`] runs sequentially.
//! Results always come back in input order, so output is identical either
//! way.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps `f` over `items`, giving each worker its own scratch state from
/// `init`.
pub fn map_init<T, R, S, I, F>(exec: Exec, items: &[T], init: I, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel if items.len() > 1 => {
            use rayon::prelude::*;
            items.par_iter().map_init(&init, |s, t| f(s, t)).collect()
        }
        _ => {
            let mut s = init();
            items.iter().map(|t| f(&mut s, t)).collect()
        }
    }
}

pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_init(exec, items, || (), |_, t| f(t))
}
