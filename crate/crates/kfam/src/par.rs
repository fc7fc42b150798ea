//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) large index ranges are mapped on the
//! rayon pool; otherwise, or below [`MIN_PARALLEL_LEN`], they run in order.
//! Results are always collected in index order, so output does not depend on
//! the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Ranges shorter than this stay on the calling thread.
pub const MIN_PARALLEL_LEN: usize = 64;

/// `(0..len).map(f).collect()`, possibly in parallel.
#[inline]
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if len >= MIN_PARALLEL_LEN {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// `items.iter().map(f).collect()`, possibly in parallel.
#[inline]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if items.len() >= MIN_PARALLEL_LEN {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// True when the crate was built with rayon support.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_range(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        let w = map_slice(&v, |x| x + 1);
        assert_eq!(w[999], 999 * 999 + 1);
    }
}
