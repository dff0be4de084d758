//! Parallel suite execution. Produces exactly the records of
//! [`weat_core::runner::run_suite`], in the same order, for any worker count.

use rayon::prelude::*;
use weat_core::embeddings::EmbeddingStore;
use weat_core::runner::{check_coverage, evaluate_task, finish, RunError, RunRecord, RunnerConfig};
use weat_core::testspec::TestSuite;

#[derive(Debug, thiserror::Error)]
pub enum ParallelRunError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Evaluates the test x store grid on `workers` threads (0 = one per core).
pub fn run_suite_parallel(
    suite: &TestSuite,
    stores: &[EmbeddingStore],
    config: &RunnerConfig,
    workers: usize,
) -> Result<Vec<RunRecord>, ParallelRunError> {
    config.stats.validate().map_err(RunError::from)?;
    check_coverage(suite, stores)?;
    let grid: Vec<(usize, usize)> = (0..suite.tests.len())
        .flat_map(|t| (0..stores.len()).map(move |s| (t, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let records: Vec<RunRecord> = pool.install(|| {
        grid.par_iter()
            .map(|&(t, s)| evaluate_task(&suite.tests[t], &stores[s], &config.stats))
            .collect()
    });
    Ok(finish(records, config)?)
}
