use abc_core::Executor;
use rayon::prelude::*;

/// Proposals per worker handed out in one batch.
const BATCH_PER_WORKER: u64 = 16;

/// Evaluates proposal batches on a dedicated rayon pool.
///
/// With one worker it degenerates to in-thread evaluation of single
/// proposals. Results never depend on the worker count.
pub struct ThreadedExecutor {
    pool: Option<rayon::ThreadPool>,
    workers: usize,
}

impl ThreadedExecutor {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()?,
            )
        } else {
            None
        };
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Executor for ThreadedExecutor {
    fn map_range<T, F>(&self, start: u64, len: u64, f: &F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        match &self.pool {
            None => (start..start + len).map(f).collect(),
            Some(pool) => pool.install(|| (start..start + len).into_par_iter().map(f).collect()),
        }
    }

    fn batch_size(&self) -> u64 {
        if self.pool.is_some() {
            self.workers as u64 * BATCH_PER_WORKER
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_in_counter_order() {
        let exec = ThreadedExecutor::new(4).unwrap();
        assert_eq!(exec.batch_size(), 64);
        let out = exec.map_range(10, 100, &|c| c * 2);
        assert_eq!(out, (10..110).map(|c| c * 2).collect::<Vec<_>>());
        assert_eq!(ThreadedExecutor::new(0).unwrap().workers(), 1);
    }
}
