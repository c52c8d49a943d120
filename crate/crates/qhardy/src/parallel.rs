//! Row-parallel execution helper.
//!
//! With the `parallel` feature (default) rows are distributed over the rayon
//! pool; without it the same closure runs sequentially. Each row is computed
//! independently with taps accumulated in a fixed order, so the output does
//! not depend on the schedule.

#[cfg(feature = "parallel")]
pub(crate) fn for_each_row<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    use rayon::prelude::*;
    data.par_chunks_mut(width)
        .enumerate()
        .for_each(|(r, row)| f(r, row));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_row<T, F>(data: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    for (r, row) in data.chunks_mut(width).enumerate() {
        f(r, row);
    }
}
