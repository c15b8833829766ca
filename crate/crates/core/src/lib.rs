//! Learned sparse retrieval with document-frequency aware regularization.
//!
//! The crate trains a small sparse document encoder under either the FLOPS
//! regularizer or its DF-weighted variant, indexes the resulting vectors in
//! an exhaustive-scoring inverted index, and measures the sparsity and
//! latency diagnostics that separate the two: the DF of the most frequent
//! term, the number of documents each query matches, and the average number
//! of active terms per document.
//!
//! Modules, bottom up:
//!
//! - [`text`], [`sparse`], [`df`]: tokenization, vocabulary, sparse vectors, DF estimates
//! - [`reg`]: FLOPS and DF-FLOPS losses, the penalty curve, the λ warmup
//! - [`encoder`]: the low-rank encoder, ranking loss, and training loop
//! - [`index`]: inverted index, pruning, search, DF reports
//! - [`eval`]: MRR / recall / nDCG, TREC formats, latency benchmark
//! - [`pipeline`]: file-level commands and the regime comparison experiment

pub mod corpus;
pub mod df;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod index;
pub mod pipeline;
pub mod reg;
pub mod sparse;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
