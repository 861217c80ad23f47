//! Legal citation extraction, normalization, and recommendation.
//!
//! The crate covers an offline pipeline over a corpus of decision texts:
//!
//! 1. [`citation`] — regex extraction of case/statute/regulation citations,
//!    normalization against an authority list, and the pruned citation
//!    vocabulary.
//! 2. [`corpus`] — tokenization with citation re-insertion, JSONL ingestion,
//!    and deterministic train/validation/test splits with 6 test folds.
//! 3. [`cf`] — citation-list recommendation by user-based top-K collaborative
//!    filtering.
//! 4. [`context`] — context-aware recommendation over tf-idf context banks,
//!    plus the majority baseline.
//! 5. [`fusion`] — metadata conditional-probability features and pairwise
//!    linear-SVM fusion weights for reranking.
//! 6. [`windows`] — seeded context/forecast window sampling and JSONL export
//!    for external trainers.
//! 7. [`eval`] — recall@k under both query protocols, fold statistics, and
//!    breakdown tables.
//!
//! The `citerec` binary wires these into subcommands; see the repository
//! README for the pipeline walkthrough.

pub mod artifact;
pub mod cf;
pub mod citation;
pub mod cli;
pub mod config;
pub mod context;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod hash;
pub mod ranked;
pub mod recommender;
pub mod sparse;
pub mod stopwords;
pub mod windows;

pub use error::{Error, Result};
