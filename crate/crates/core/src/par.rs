//! Order-preserving data-parallel maps.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it, and for [`Execution::Sequential`], the same closures run in a
//! plain loop. Outputs are always in input order, so results never depend on
//! the partitioning.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[cfg(feature = "parallel")]
/// Below this many items the parallel path is not worth the scheduling cost.
const MIN_PARALLEL_LEN: usize = 256;

pub fn map_range_with<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel if len >= MIN_PARALLEL_LEN => (0..len).into_par_iter().map(f).collect(),
        _ => (0..len).map(f).collect(),
    }
}

pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_range_with(Execution::default(), len, f)
}

/// Maps over a slice; unlike [`map_range`] every item is dispatched, which
/// suits coarse tasks such as whole-profile integrations.
pub fn map_slice_with<I, T, F>(exec: Execution, items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_slice_with(Execution::default(), items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = map_range_with(Execution::Sequential, 10_000, f);
        let b = map_range_with(Execution::Parallel, 10_000, f);
        assert_eq!(a, b);
        let items: Vec<u64> = (0..100).collect();
        assert_eq!(
            map_slice_with(Execution::Sequential, &items, |x| x * x),
            map_slice_with(Execution::Parallel, &items, |x| x * x)
        );
    }
}
