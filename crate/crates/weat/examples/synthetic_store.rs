//! Writes an embedding interchange file with random Gaussian vectors for the
//! texts produced by `weat collect-texts`. Handy for trying the pipeline
//! without a model.
//!
//!     cargo run -p weat --example synthetic_store -- texts.txt toy-model 16 > toy.jsonl

use std::io::{self, BufRead};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use weat::core::embeddings::{EmbeddingStore, Provenance};
use weat::core::runner::derive_seed;
use weat::store::write_store;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [texts, model_id, dim] = args.as_slice() else {
        anyhow::bail!("usage: synthetic_store <texts.txt> <model_id> <dim>");
    };
    let dim: usize = dim.parse()?;
    let mut store = EmbeddingStore::new(
        dim,
        Provenance {
            model_id: model_id.clone(),
            pooling: "none".into(),
            layer: "synthetic".into(),
            cased: true,
        },
    )?;
    let model_seed = derive_seed(0, model_id);
    for line in io::BufReader::new(std::fs::File::open(texts)?).lines() {
        let text = line?;
        let mut rng = StdRng::seed_from_u64(derive_seed(model_seed, &text));
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        store.insert(&text, v)?;
    }
    write_store(&store, io::stdout().lock())?;
    Ok(())
}
