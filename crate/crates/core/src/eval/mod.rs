//! Retrieval quality metrics, TREC file formats, and the latency benchmark.

mod bench;
mod metrics;
mod trec;

pub use bench::{bench_latency, format_bench_table, nearest_rank_percentile, BenchReport};
pub use metrics::{mrr_at_k, ndcg_at_k, recall_at_k, Qrels, Run};
pub use trec::{
    format_qrels, format_run, format_run_lines, parse_qrels, parse_run, read_qrels, read_run,
};
