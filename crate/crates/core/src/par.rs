//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they run the same closures in order on the caller.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether the parallel backend was compiled in.
pub const PARALLEL: bool = cfg!(feature = "parallel");

/// Splits `items` into at most `shards` contiguous chunks and maps each one.
/// Output order follows chunk order regardless of backend.
pub fn map_shards<T, R, F>(items: &[T], shards: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    if items.is_empty() {
        return Vec::new();
    }
    let shards = shards.clamp(1, items.len());
    let chunk = items.len().div_ceil(shards);
    #[cfg(feature = "parallel")]
    {
        items.par_chunks(chunk).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.chunks(chunk).map(f).collect()
    }
}

/// Same as [`map_shards`] but always sequential.
pub fn map_shards_sequential<T, R, F>(items: &[T], shards: usize, f: F) -> Vec<R>
where
    F: Fn(&[T]) -> R,
{
    if items.is_empty() {
        return Vec::new();
    }
    let shards = shards.clamp(1, items.len());
    let chunk = items.len().div_ceil(shards);
    items.chunks(chunk).map(f).collect()
}

/// Element-wise map preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
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
