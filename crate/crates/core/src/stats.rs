//! Association statistics: per-item association, the differential test
//! statistic, permutation-test p-values and the effect size.
//!
//! Everything downstream of the cosine kernel works on the per-item values
//! `s(w, A, B)` held by an [`AssociationTable`]. A partition of the combined
//! targets into `(X_i, Y_i)` scores `sum(X_i) - sum(Y_i)`.
//!
//! Permutation counts use `s_i >= s_obs` with the observed partition included,
//! so an exact p-value is always one of `k / count` with `k >= 1`, and the
//! Monte-Carlo estimate is `(b + 1) / (m + 1)`. Partition scores within a
//! relative `1e-12` of the observed score (relative to the total absolute
//! per-item mass) count as ties, which keeps tie counts stable under
//! floating-point reassociation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embeddings::{cosine, EmbeddingError, EmbeddingStore};
use crate::testspec::{BiasTest, ConceptSet};

/// Relative width of the tie band around the observed statistic.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("{} text(s) missing from embeddings of model {model_id:?}: {}", texts.len(), texts.join(", "))]
    MissingEmbeddings { model_id: String, texts: Vec<String> },
    #[error("vector for {0:?} has zero norm")]
    ZeroNorm(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("target and attribute sets must all be non-empty")]
    EmptySet,
    #[error("per-item associations have zero spread; effect size is undefined")]
    DegenerateVariance,
    #[error("{count} partitions exceed the exact-enumeration threshold {threshold}")]
    TooManyPartitions { count: u128, threshold: u64 },
    #[error("target sets differ in size ({targ1} vs {targ2}) under the error policy")]
    UnequalTargets { targ1: usize, targ2: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqualSizePolicy {
    #[default]
    Error,
    /// Drop random items from the larger target set.
    Subsample,
}

impl EqualSizePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            EqualSizePolicy::Error => "error",
            EqualSizePolicy::Subsample => "subsample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatsConfig {
    /// Largest partition count enumerated exactly.
    pub exact_threshold: u64,
    pub mc_samples: u64,
    pub equal_size_policy: EqualSizePolicy,
    pub seed: u64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            exact_threshold: 100_000,
            mc_samples: 100_000,
            equal_size_policy: EqualSizePolicy::Error,
            seed: 42,
        }
    }
}

impl StatsConfig {
    pub fn validate(&self) -> Result<(), StatsError> {
        if self.exact_threshold < 1 {
            return Err(StatsError::InvalidConfig("exact_threshold must be at least 1"));
        }
        if self.mc_samples < 100 {
            return Err(StatsError::InvalidConfig("mc_samples must be at least 100"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    pub s_obs: f64,
    /// `s(w, A, B)` for every target item, first target set then second.
    pub per_item: Vec<(String, f64)>,
    pub effect_size: f64,
    pub p_value: f64,
    pub method: Method,
    /// Partitions enumerated (exact) or samples drawn (Monte-Carlo).
    pub count: u64,
    /// Generator seed, Monte-Carlo only.
    pub seed: Option<u64>,
}

/// Per-item association values of a fixed test instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationTable {
    values: Vec<f64>,
    labels: Vec<String>,
    n_x: usize,
}

fn mean_cosine(w: &[f64], set: &[&[f64]]) -> Result<f64, EmbeddingError> {
    let mut sum = 0.0;
    for v in set {
        sum += cosine(w, v)?;
    }
    Ok(sum / set.len() as f64)
}

/// `mean_a cos(w, a) - mean_b cos(w, b)` over raw vectors.
pub fn association(w: &[f64], a: &[&[f64]], b: &[&[f64]]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySet);
    }
    Ok(mean_cosine(w, a)? - mean_cosine(w, b)?)
}

impl AssociationTable {
    /// Builds the table from raw target and attribute vectors.
    pub fn from_vectors(
        x: &[&[f64]],
        y: &[&[f64]],
        a: &[&[f64]],
        b: &[&[f64]],
    ) -> Result<Self, StatsError> {
        if x.is_empty() || y.is_empty() {
            return Err(StatsError::EmptySet);
        }
        let values = x
            .iter()
            .chain(y)
            .map(|w| association(w, a, b))
            .collect::<Result<Vec<_>, _>>()?;
        let labels = (0..values.len()).map(|i| format!("#{i}")).collect();
        Ok(Self {
            values,
            labels,
            n_x: x.len(),
        })
    }

    /// Builds the table from precomputed per-item values.
    pub fn from_values(x: &[f64], y: &[f64]) -> Result<Self, StatsError> {
        if x.is_empty() || y.is_empty() {
            return Err(StatsError::EmptySet);
        }
        let values: Vec<f64> = x.iter().chain(y).copied().collect();
        let labels = (0..values.len()).map(|i| format!("#{i}")).collect();
        Ok(Self {
            values,
            labels,
            n_x: x.len(),
        })
    }

    /// Looks every text up in `store`; all missing texts are reported at once.
    pub fn from_store(
        x: &ConceptSet,
        y: &ConceptSet,
        a: &ConceptSet,
        b: &ConceptSet,
        store: &EmbeddingStore,
    ) -> Result<Self, StatsError> {
        let all = || x.iter().chain(y.iter()).chain(a.iter()).chain(b.iter());
        let missing = store.missing(all());
        if !missing.is_empty() {
            return Err(StatsError::MissingEmbeddings {
                model_id: String::from(store.model_id()),
                texts: missing,
            });
        }
        for text in all() {
            if store.lookup(text)?.norm() == 0.0 {
                return Err(StatsError::ZeroNorm(String::from(text)));
            }
        }
        let vectors = |set: &ConceptSet| -> Result<Vec<&[f64]>, StatsError> {
            set.iter()
                .map(|t| Ok(&**store.lookup(t)?))
                .collect::<Result<Vec<_>, StatsError>>()
        };
        let (xv, yv, av, bv) = (vectors(x)?, vectors(y)?, vectors(a)?, vectors(b)?);
        let mut table = Self::from_vectors(&xv, &yv, &av, &bv)?;
        table.labels = x.items.iter().chain(&y.items).cloned().collect();
        Ok(table)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_values(&self) -> &[f64] {
        &self.values[..self.n_x]
    }

    pub fn y_values(&self) -> &[f64] {
        &self.values[self.n_x..]
    }

    pub fn per_item(&self) -> Vec<(String, f64)> {
        self.labels.iter().cloned().zip(self.values.iter().copied()).collect()
    }

    /// `sum_x s(x) - sum_y s(y)`.
    pub fn statistic(&self) -> f64 {
        self.x_values().iter().sum::<f64>() - self.y_values().iter().sum::<f64>()
    }

    /// Difference of group means over the sample standard deviation of all
    /// per-item values.
    pub fn effect_size(&self) -> Result<f64, StatsError> {
        let n = self.values.len();
        let first = self.values[0];
        if n < 2 || self.values.iter().all(|v| *v == first) {
            return Err(StatsError::DegenerateVariance);
        }
        let mean_of = |vs: &[f64]| vs.iter().sum::<f64>() / vs.len() as f64;
        let mean = mean_of(&self.values);
        let var = self.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let sd = libm::sqrt(var);
        if !sd.is_finite() || sd <= 0.0 {
            return Err(StatsError::DegenerateVariance);
        }
        Ok((mean_of(self.x_values()) - mean_of(self.y_values())) / sd)
    }

    fn tie_floor(&self, s_obs: f64) -> f64 {
        let mass: f64 = self.values.iter().map(|v| v.abs()).sum();
        s_obs - TIE_TOLERANCE * mass
    }

    /// Number of equal-size relabelings, `C(n, n_x)`; saturates at `u128::MAX`.
    pub fn partition_count(&self) -> u128 {
        binomial(self.values.len() as u64, self.n_x as u64)
    }

    /// Exact permutation p-value over every partition, enumerated as
    /// lexicographic index combinations. Returns `(p, count)`.
    pub fn p_value_exact(&self, threshold: u64) -> Result<(f64, u64), StatsError> {
        let total = self.partition_count();
        if total > threshold as u128 {
            return Err(StatsError::TooManyPartitions {
                count: total,
                threshold,
            });
        }
        let n = self.values.len();
        let k = self.n_x;
        let floor = self.tie_floor(self.statistic());
        let mut combo: Vec<usize> = (0..k).collect();
        let mut hits = 0u64;
        let mut count = 0u64;
        loop {
            let mut inside = 0.0;
            let mut outside = 0.0;
            let mut next = 0;
            for (i, v) in self.values.iter().enumerate() {
                if next < k && combo[next] == i {
                    inside += v;
                    next += 1;
                } else {
                    outside += v;
                }
            }
            count += 1;
            if inside - outside >= floor {
                hits += 1;
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
        debug_assert_eq!(count as u128, total);
        Ok((hits as f64 / count as f64, count))
    }

    /// Monte-Carlo p-value from `samples` uniform random partitions drawn with
    /// a ChaCha8 generator seeded from `seed`. Returns `(p, samples)`.
    pub fn p_value_monte_carlo(&self, samples: u64, seed: u64) -> (f64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let floor = self.tie_floor(self.statistic());
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        let mut hits = 0u64;
        for _ in 0..samples {
            let (chosen, rest) = order.partial_shuffle(&mut rng, self.n_x);
            let inside: f64 = chosen.iter().map(|&i| self.values[i]).sum();
            let outside: f64 = rest.iter().map(|&i| self.values[i]).sum();
            if inside - outside >= floor {
                hits += 1;
            }
        }
        ((hits + 1) as f64 / (samples + 1) as f64, samples)
    }

    /// Full result, exact when the partition count fits under the threshold.
    pub fn evaluate(&self, config: &StatsConfig, seed: u64) -> Result<AssociationResult, StatsError> {
        config.validate()?;
        let effect_size = self.effect_size()?;
        let (p_value, method, count, seed) = if self.partition_count() <= config.exact_threshold as u128 {
            let (p, count) = self.p_value_exact(config.exact_threshold)?;
            (p, Method::Exact, count, None)
        } else {
            let (p, count) = self.p_value_monte_carlo(config.mc_samples, seed);
            (p, Method::MonteCarlo, count, Some(seed))
        };
        Ok(AssociationResult {
            s_obs: self.statistic(),
            per_item: self.per_item(),
            effect_size,
            p_value,
            method,
            count,
            seed,
        })
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// `s(w, A, B)` for one text.
pub fn assoc_single(
    w: &str,
    a: &ConceptSet,
    b: &ConceptSet,
    store: &EmbeddingStore,
) -> Result<f64, StatsError> {
    let wset = ConceptSet {
        category: String::from("w"),
        items: alloc::vec![String::from(w)],
    };
    let table = AssociationTable::from_store(&wset, &wset, a, b, store)?;
    Ok(table.values()[0])
}

pub fn test_statistic(
    x: &ConceptSet,
    y: &ConceptSet,
    a: &ConceptSet,
    b: &ConceptSet,
    store: &EmbeddingStore,
) -> Result<f64, StatsError> {
    Ok(AssociationTable::from_store(x, y, a, b, store)?.statistic())
}

pub fn effect_size(
    x: &ConceptSet,
    y: &ConceptSet,
    a: &ConceptSet,
    b: &ConceptSet,
    store: &EmbeddingStore,
) -> Result<f64, StatsError> {
    AssociationTable::from_store(x, y, a, b, store)?.effect_size()
}

pub fn p_value_exact(
    x: &ConceptSet,
    y: &ConceptSet,
    a: &ConceptSet,
    b: &ConceptSet,
    store: &EmbeddingStore,
    threshold: u64,
) -> Result<(f64, u64), StatsError> {
    AssociationTable::from_store(x, y, a, b, store)?.p_value_exact(threshold)
}

pub fn p_value_mc(
    x: &ConceptSet,
    y: &ConceptSet,
    a: &ConceptSet,
    b: &ConceptSet,
    store: &EmbeddingStore,
    samples: u64,
    seed: u64,
) -> Result<(f64, u64), StatsError> {
    if samples < 100 {
        return Err(StatsError::InvalidConfig("mc_samples must be at least 100"));
    }
    Ok(AssociationTable::from_store(x, y, a, b, store)?.p_value_monte_carlo(samples, seed))
}

/// Makes the two target sets equal in size according to `policy`.
///
/// Under [`EqualSizePolicy::Subsample`] the larger set keeps a uniformly random
/// subset of its items (original order preserved), drawn from stream 1 of a
/// ChaCha8 generator seeded with `seed`. Returns the adjusted test and a
/// warning when items were dropped.
pub fn apply_equal_size_policy(
    test: &BiasTest,
    policy: EqualSizePolicy,
    seed: u64,
) -> Result<(BiasTest, Option<String>), StatsError> {
    let (n1, n2) = (test.target1.len(), test.target2.len());
    if n1 == n2 {
        return Ok((test.clone(), None));
    }
    if policy == EqualSizePolicy::Error {
        return Err(StatsError::UnequalTargets { targ1: n1, targ2: n2 });
    }
    let mut out = test.clone();
    let (larger, name, keep) = if n1 > n2 {
        (&mut out.target1, "targ1", n2)
    } else {
        (&mut out.target2, "targ2", n1)
    };
    let before = larger.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut kept = rand::seq::index::sample(&mut rng, before, keep).into_vec();
    kept.sort_unstable();
    larger.items = kept.into_iter().map(|i| larger.items[i].clone()).collect();
    let warning = format!("subsampled {name} from {before} to {keep} items to equalize target sizes");
    Ok((out, Some(warning)))
}

/// Applies the equal-size policy and evaluates the test end to end.
pub fn run_test(
    test: &BiasTest,
    store: &EmbeddingStore,
    config: &StatsConfig,
) -> Result<AssociationResult, StatsError> {
    config.validate()?;
    let (test, _) = apply_equal_size_policy(test, config.equal_size_policy, config.seed)?;
    AssociationTable::from_store(&test.target1, &test.target2, &test.attr1, &test.attr2, store)?
        .evaluate(config, config.seed)
}
