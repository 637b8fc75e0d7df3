//! Index-ordered data-parallel helpers.
//!
//! Every helper returns results in index order, so reductions performed by
//! the caller are independent of the number of worker threads. With the
//! `parallel` feature disabled the same functions run sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
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
        map_indexed_seq(n, f)
    }
}

/// Sequential twin of [`map_indexed`], always available.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps a slice in index order.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Splits `total` work items into shards of at most `shard` items.
/// Returns `(start, len)` pairs; the split depends only on the inputs.
pub fn shards(total: u64, shard: u64) -> Vec<(u64, u64)> {
    let shard = shard.max(1);
    let mut out = Vec::with_capacity(total.div_ceil(shard) as usize);
    let mut start = 0;
    while start < total {
        let len = shard.min(total - start);
        out.push((start, len));
        start += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_order_is_preserved() {
        let v = map_indexed(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
        assert_eq!(v, map_indexed_seq(1000, |i| i * 2));
    }

    #[test]
    fn shards_cover_range() {
        let s = shards(10_001, 1000);
        assert_eq!(s.len(), 11);
        assert_eq!(s.iter().map(|&(_, l)| l).sum::<u64>(), 10_001);
        assert_eq!(s.last(), Some(&(10_000, 1)));
        assert!(shards(0, 10).is_empty());
    }
}
