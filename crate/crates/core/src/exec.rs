//! Index-range kernels that run on rayon with the `parallel` feature and
//! sequentially without it. Results never depend on scheduling: searches
//! return the first hit in index order and reductions are associative.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// First `Some` produced by `f` over `0..n`, in index order.
pub fn find_first<T, F>(n: usize, f: F) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().find_map_first(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).find_map(f)
    }
}

/// Sum of `f(i)` over `0..n`.
pub fn sum<F>(n: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).sum()
    }
}

/// `f` applied to every index, collected in index order.
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Whether this build runs kernels on a thread pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_first_is_ordered() {
        let hit = find_first(10_000, |i| (i % 997 == 996 || i == 5000).then_some(i));
        assert_eq!(hit, Some(996));
        assert_eq!(find_first(100, |_| None::<usize>), None);
    }

    #[test]
    fn sum_and_map() {
        assert_eq!(sum(101, |i| i as u64), 5050);
        assert_eq!(map(4, |i| i * i), vec![0, 1, 4, 9]);
    }
}
