//! Static analysis of GitHub Actions workflow files.
//!
//! The pipeline parses a workflow into its concrete key paths, abstracts
//! those into language constructs, maps constructs to features through a
//! catalog, and derives per-workflow metrics. Corpus statistics, evolution
//! series, reliability comparisons and a lint pass build on that.

pub mod abstraction;
pub mod catalog;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod lint;
pub mod metrics;
pub mod pipeline;
pub mod reliability;
pub mod stats;
pub mod workflow;

pub use error::{Error, Result};
