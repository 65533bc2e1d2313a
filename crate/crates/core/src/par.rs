//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature enabled the inner loops run on rayon;
//! without it they run sequentially. Reductions are structured so the
//! result is bit-identical either way: partial results are produced per
//! chunk and combined in index order.

/// Apply `f` to disjoint `chunk` slices of `data`.
#[cfg(feature = "parallel")]
pub fn maybe_par_chunks_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(&mut [T]) + Sync + Send,
{
    use rayon::prelude::*;
    data.par_chunks_mut(chunk).for_each(|c| f(c));
}

#[cfg(not(feature = "parallel"))]
pub fn maybe_par_chunks_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(&mut [T]) + Sync + Send,
{
    data.chunks_mut(chunk).for_each(|c| f(c));
}

/// Map each item of `items` through `f`, preserving order.
#[cfg(feature = "parallel")]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Sequential reference implementations used by the benchmark suite to
/// compare against the (possibly) parallel versions above.
pub mod seq {
    pub fn chunks_mut<T, F>(data: &mut [T], chunk: usize, f: F)
    where
        F: Fn(&mut [T]),
    {
        data.chunks_mut(chunk).for_each(|c| f(c));
    }
}
