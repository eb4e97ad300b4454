use alloc::vec::Vec;

/// Runs independent indexed jobs and returns their results in index order.
///
/// Implementations may run jobs concurrently but must return
/// `[f(0), f(1), ..., f(n - 1)]`, so callers that fold the results
/// sequentially get identical output for any worker count.
pub trait Executor: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
