//! Order-preserving data-parallel helpers. With the `parallel` feature off
//! every helper runs sequentially and produces identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
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

pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
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

/// Index of the minimum key; ties go to the lowest index. Keys are computed
/// in parallel, the reduction is sequential.
pub fn argmin_by<F>(n: usize, key: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let keys = map_range(n, key);
    let mut best: Option<(usize, f64)> = None;
    for (i, k) in keys.into_iter().enumerate() {
        match best {
            Some((_, b)) if k.total_cmp(&b).is_ge() => {}
            _ => best = Some((i, k)),
        }
    }
    best
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
