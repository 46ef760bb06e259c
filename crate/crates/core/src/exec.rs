//! Row-parallel execution policy.
//!
//! Every data-parallel kernel computes each output row independently, so the
//! parallel and sequential paths produce bitwise identical results. Reductions
//! (dot products, norms) always run sequentially in index order.

/// Selects how row-independent kernels are executed.
///
/// `Parallel` falls back to sequential execution when the crate is built
/// without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

// Below this many rows the rayon overhead dominates.
#[cfg(feature = "parallel")]
const PAR_MIN_LEN: usize = 4096;

impl Execution {
    /// `out[i] = f(i)` for every index.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel if out.len() >= PAR_MIN_LEN => {
                use rayon::prelude::*;
                out.par_iter_mut()
                    .with_min_len(1024)
                    .enumerate()
                    .for_each(|(i, o)| *o = f(i));
            }
            _ => out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i)),
        }
    }

    /// `out[i] = f(i, out[i])` for every index.
    pub fn update<T, F>(self, out: &mut [T], f: F)
    where
        T: Send + Copy,
        F: Fn(usize, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel if out.len() >= PAR_MIN_LEN => {
                use rayon::prelude::*;
                out.par_iter_mut()
                    .with_min_len(1024)
                    .enumerate()
                    .for_each(|(i, o)| *o = f(i, *o));
            }
            _ => out
                .iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = f(i, *o)),
        }
    }

    /// Maps `f` over `items`, preserving order. Used for coarse-grained work
    /// (blocks, dense columns, grid cells) where each item is expensive.
    pub fn map_collect<I, T, F>(self, items: Vec<I>, f: F) -> Vec<T>
    where
        I: Send,
        T: Send,
        F: Fn(I) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.into_par_iter().map(f).collect()
            }
            _ => items.into_iter().map(f).collect(),
        }
    }

    /// Runs `f` on each mutable chunk together with its index.
    pub fn for_each_chunk<T, F>(self, chunks: Vec<&mut [T]>, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel if chunks.len() > 1 => {
                use rayon::prelude::*;
                chunks
                    .into_par_iter()
                    .enumerate()
                    .for_each(|(i, c)| f(i, c));
            }
            _ => chunks
                .into_iter()
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
        }
    }
}
