//! Data-parallel map with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`map_indexed`]. Results are
//! always returned in input order, so reductions performed afterwards do not
//! depend on thread scheduling and parallel runs are bit-identical to
//! sequential ones.

use serde::{Deserialize, Serialize};

/// How independent work items (optimizer starts, scan samples, search starts)
/// are executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) fn map_indexed<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
        }
    }
    let _ = exec;
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let seq = map_indexed(Execution::Sequential, &items, |i, x| (i as u64) * x);
        let par = map_indexed(Execution::Parallel, &items, |i, x| (i as u64) * x);
        assert_eq!(seq, par);
    }
}
