//! Embedding association tests over precomputed text embeddings.
//!
//! This crate holds the allocation-only core of the engine: bias test
//! definitions and validation ([`testspec`]), sentence-template expansion and
//! Turkish-aware casing ([`templating`]), the embedding store and cosine kernel
//! ([`embeddings`]), the association statistics with exact and Monte-Carlo
//! permutation p-values ([`stats`]), and deterministic per-test evaluation
//! ([`runner`]).
//!
//! File formats, parallel scheduling, reports and the command-line tool live in
//! the `weat` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod embeddings;
pub mod runner;
pub mod stats;
pub mod templating;
pub mod testspec;
mod text;

pub use embeddings::{cosine, EmbeddingError, EmbeddingStore, Provenance, Vector};
pub use runner::{derive_seed, RunError, RunRecord, RunnerConfig};
pub use stats::{
    AssociationResult, AssociationTable, EqualSizePolicy, Method, StatsConfig, StatsError,
};
pub use templating::{turkish_lowercase, Casing, Template, TemplateError, TemplateSet};
pub use testspec::{
    BiasTest, Bleaching, ConceptSet, Diagnostic, Level, Severity, TestSpecError, TestSuite,
    Variant,
};
pub use text::nfc;
