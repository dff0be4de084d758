//! Per-(test, store) evaluation with deterministic seeding.
//!
//! The sequential [`run_suite`] here defines the ordering and failure rules;
//! the `weat` crate schedules the same tasks across threads.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::embeddings::EmbeddingStore;
use crate::stats::{apply_equal_size_policy, AssociationResult, AssociationTable, StatsConfig, StatsError};
use crate::testspec::{collect_texts, BiasTest, Level, TestSuite, Variant};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the big-endian bytes of `global_seed` followed by the UTF-8
/// bytes of `test_id`.
pub fn derive_seed(global_seed: u64, test_id: &str) -> u64 {
    global_seed
        .to_be_bytes()
        .iter()
        .chain(test_id.as_bytes())
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingTexts {
    pub model_id: String,
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("embedding coverage incomplete for {} model(s): {}", .0.len(), describe_missing(.0))]
    Coverage(Vec<MissingTexts>),
    #[error("test {test_id:?} failed on model {model_id:?}: {message}")]
    RecordFailed {
        test_id: String,
        model_id: String,
        message: String,
    },
    #[error(transparent)]
    Config(#[from] StatsError),
}

fn describe_missing(missing: &[MissingTexts]) -> String {
    missing
        .iter()
        .map(|m| alloc::format!("{} missing [{}]", m.model_id, m.texts.join(", ")))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunnerConfig {
    pub stats: StatsConfig,
    /// Abort on the first failed record instead of recording it.
    pub fail_fast: bool,
}

/// One row of a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub test_id: String,
    pub level: Level,
    pub variants: BTreeSet<Variant>,
    pub model_id: String,
    pub n_targ1: usize,
    pub n_targ2: usize,
    pub n_attr1: usize,
    pub n_attr2: usize,
    /// The statistics, or the error message of a failed evaluation.
    pub result: Result<AssociationResult, String>,
    pub warnings: Vec<String>,
}

impl RunRecord {
    pub fn is_failure(&self) -> bool {
        self.result.is_err()
    }
}

/// Every text of the suite each store lacks. Stores with full coverage are
/// omitted.
pub fn check_coverage(suite: &TestSuite, stores: &[EmbeddingStore]) -> Result<(), RunError> {
    let texts = collect_texts(suite);
    let missing: Vec<MissingTexts> = stores
        .iter()
        .filter_map(|store| {
            let texts = store.missing(texts.iter().map(String::as_str));
            (!texts.is_empty()).then(|| MissingTexts {
                model_id: store.model_id().to_string(),
                texts,
            })
        })
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(RunError::Coverage(missing))
    }
}

/// Evaluates one test against one store. Statistical failures are captured in
/// the record.
pub fn evaluate_task(test: &BiasTest, store: &EmbeddingStore, config: &StatsConfig) -> RunRecord {
    let seed = derive_seed(config.seed, &test.id);
    let mut record = RunRecord {
        test_id: test.id.clone(),
        level: test.level,
        variants: test.variants.clone(),
        model_id: store.model_id().to_string(),
        n_targ1: test.target1.len(),
        n_targ2: test.target2.len(),
        n_attr1: test.attr1.len(),
        n_attr2: test.attr2.len(),
        result: Err(String::new()),
        warnings: Vec::new(),
    };
    let adjusted = match apply_equal_size_policy(test, config.equal_size_policy, seed) {
        Ok((adjusted, warning)) => {
            record.warnings.extend(warning);
            adjusted
        }
        Err(e) => {
            record.result = Err(e.to_string());
            return record;
        }
    };
    record.n_targ1 = adjusted.target1.len();
    record.n_targ2 = adjusted.target2.len();
    record.result = AssociationTable::from_store(
        &adjusted.target1,
        &adjusted.target2,
        &adjusted.attr1,
        &adjusted.attr2,
        store,
    )
    .and_then(|table| table.evaluate(config, seed))
    .map_err(|e| e.to_string());
    record
}

/// Applies the fail-fast rule to an ordered record list.
pub fn finish(records: Vec<RunRecord>, config: &RunnerConfig) -> Result<Vec<RunRecord>, RunError> {
    if config.fail_fast {
        if let Some(r) = records.iter().find(|r| r.is_failure()) {
            return Err(RunError::RecordFailed {
                test_id: r.test_id.clone(),
                model_id: r.model_id.clone(),
                message: r.result.clone().err().unwrap_or_default(),
            });
        }
    }
    Ok(records)
}

/// Runs every test against every store, test-major then store order.
pub fn run_suite(
    suite: &TestSuite,
    stores: &[EmbeddingStore],
    config: &RunnerConfig,
) -> Result<Vec<RunRecord>, RunError> {
    config.stats.validate()?;
    check_coverage(suite, stores)?;
    let records = suite
        .tests
        .iter()
        .flat_map(|test| stores.iter().map(move |store| evaluate_task(test, store, &config.stats)))
        .collect();
    finish(records, config)
}
