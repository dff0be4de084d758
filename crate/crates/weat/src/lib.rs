//! File formats, suite loading, parallel execution, reports and the `weat`
//! command-line tool for embedding association tests.
//!
//! The statistics and test model live in [`weat_core`], re-exported here as
//! [`core`].

pub use weat_core as core;

pub mod cli;
pub mod report;
pub mod results;
pub mod runner;
pub mod store;
pub mod suite;
pub mod templates;
pub mod testfile;
