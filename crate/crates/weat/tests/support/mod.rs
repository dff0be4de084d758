#![allow(dead_code)]

#[path = "../../../core/tests/support/oracle.rs"]
pub mod oracle;

use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::SeedableRng;
use weat::core::embeddings::{EmbeddingStore, Provenance};
use weat::core::runner::derive_seed;

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn sample_suite_dir() -> PathBuf {
    workspace_root().join("data/sample-suite")
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Store with a Gaussian vector per text, seeded by model and text only.
pub fn synthetic_store<S: AsRef<str>>(model_id: &str, texts: &[S], dim: usize) -> EmbeddingStore {
    let mut store = EmbeddingStore::new(
        dim,
        Provenance {
            model_id: model_id.into(),
            pooling: "mean".into(),
            layer: "last".into(),
            cased: true,
        },
    )
    .unwrap();
    let model_seed = derive_seed(0, model_id);
    for t in texts {
        let mut rng = StdRng::seed_from_u64(derive_seed(model_seed, t.as_ref()));
        store.insert(t.as_ref(), oracle::gaussian_vec(&mut rng, dim)).unwrap();
    }
    store
}
