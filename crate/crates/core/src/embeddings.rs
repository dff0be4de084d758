//! Precomputed text embeddings and the cosine kernel.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::text::nfc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("vector for {text:?} has {found} components, expected {expected}")]
    DimensionMismatch {
        text: String,
        expected: usize,
        found: usize,
    },
    #[error("vector for {text:?} has a non-finite component at index {index}")]
    NonFinite { text: String, index: usize },
    #[error("duplicate text {0:?}")]
    DuplicateText(String),
    #[error("text {text:?} is missing from embeddings of model {model_id:?}")]
    MissingText { text: String, model_id: String },
    #[error("cosine of vectors with different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("cosine of a zero-norm vector")]
    ZeroNorm,
}

/// Finite 64-bit components.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Fails with the index of the first non-finite component.
    pub fn new(components: Vec<f64>) -> Result<Self, usize> {
        match components.iter().position(|c| !c.is_finite()) {
            Some(index) => Err(index),
            None => Ok(Self(components)),
        }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(dot(&self.0, &self.0))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::LengthMismatch(u.len(), v.len()));
    }
    let nu = libm::sqrt(dot(u, u));
    let nv = libm::sqrt(dot(v, v));
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub model_id: String,
    pub pooling: String,
    pub layer: String,
    pub cased: bool,
}

/// Immutable-after-load map from NFC text to vector, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    provenance: Provenance,
    entries: Vec<(String, Vector)>,
    index: BTreeMap<String, usize>,
}

impl EmbeddingStore {
    pub fn new(dim: usize, provenance: Provenance) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(Self {
            dim,
            provenance,
            entries: Vec::new(),
            index: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, text: &str, components: Vec<f64>) -> Result<(), EmbeddingError> {
        let text = nfc(text);
        if components.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                text,
                expected: self.dim,
                found: components.len(),
            });
        }
        let vector = match Vector::new(components) {
            Ok(v) => v,
            Err(index) => return Err(EmbeddingError::NonFinite { text, index }),
        };
        if self.index.contains_key(&text) {
            return Err(EmbeddingError::DuplicateText(text));
        }
        self.index.insert(text.clone(), self.entries.len());
        self.entries.push((text, vector));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn model_id(&self) -> &str {
        &self.provenance.model_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, text: &str) -> bool {
        self.get(text).is_some()
    }

    pub fn get(&self, text: &str) -> Option<&Vector> {
        let i = match self.index.get(text) {
            Some(i) => *i,
            None => *self.index.get(nfc(text).as_str())?,
        };
        Some(&self.entries[i].1)
    }

    /// Vector for `text` after NFC normalization.
    pub fn lookup(&self, text: &str) -> Result<&Vector, EmbeddingError> {
        self.get(text).ok_or_else(|| EmbeddingError::MissingText {
            text: nfc(text),
            model_id: self.provenance.model_id.clone(),
        })
    }

    /// The texts from `texts` that have no vector, deduplicated, in input order.
    pub fn missing<'a, I>(&self, texts: I) -> Vec<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out: Vec<String> = Vec::new();
        for text in texts {
            if !self.contains(text) {
                let text = nfc(text);
                if !out.contains(&text) {
                    out.push(text);
                }
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Vector)> {
        self.entries.iter().map(|(t, v)| (t.as_str(), v))
    }
}
