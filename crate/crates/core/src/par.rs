//! Row-parallel helpers. Each row is written by exactly one closure call, so
//! any schedule yields the same bytes as the sequential loop.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(y, row)| f(y, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(y, row)| f(y, row));
}

pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    (0..n).map(f).collect()
}

/// Like [`for_each_row`] over two buffers with the same row count.
pub(crate) fn for_each_row_pair<T, U, F>(a: &mut [T], a_len: usize, b: &mut [U], b_len: usize, f: F)
where
    T: Send,
    U: Send,
    F: Fn(usize, &mut [T], &mut [U]) + Sync + Send,
{
    if a_len == 0 || b_len == 0 {
        return;
    }
    debug_assert_eq!(a.len() / a_len, b.len() / b_len);
    #[cfg(feature = "parallel")]
    a.par_chunks_mut(a_len)
        .zip(b.par_chunks_mut(b_len))
        .enumerate()
        .for_each(|(y, (ra, rb))| f(y, ra, rb));
    #[cfg(not(feature = "parallel"))]
    a.chunks_mut(a_len)
        .zip(b.chunks_mut(b_len))
        .enumerate()
        .for_each(|(y, (ra, rb))| f(y, ra, rb));
}
