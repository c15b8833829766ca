//! Query latency benchmark.
//!
//! Each timed query covers bag-of-words query encoding plus matching and
//! scoring. One untimed pass warms caches, then every query runs `repeats`
//! times in sequence on the calling thread. The average is the mean of the
//! per-query means; p99 is the nearest-rank 99th percentile of the same
//! per-query means.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::text::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub latency_avg_ms: f64,
    pub latency_p99_ms: f64,
    pub matches_avg: f64,
    pub top1_df_pct: f64,
    pub avg_emb_length: f64,
    pub queries: usize,
    pub repeats: usize,
    /// Raw wall-clock milliseconds, one row per query, one column per repeat.
    pub timings_ms: Vec<Vec<f64>>,
}

/// Nearest-rank percentile (`p` in `(0, 100]`) of `values`.
pub fn nearest_rank_percentile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn bench_latency(
    index: &InvertedIndex,
    vocab: &Vocabulary,
    queries: &[String],
    repeats: usize,
    top_k: usize,
) -> Result<BenchReport> {
    if queries.is_empty() {
        return Err(Error::EmptyInput("benchmark query set"));
    }
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be >= 1".into()));
    }

    let mut timings_ms = vec![Vec::with_capacity(repeats); queries.len()];
    for pass in 0..=repeats {
        for (qi, text) in queries.iter().enumerate() {
            let start = Instant::now();
            let terms = vocab.query_terms(text);
            let result = index.search(&terms, top_k)?;
            black_box(&result);
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            if pass > 0 {
                timings_ms[qi].push(elapsed);
            }
        }
    }

    let per_query: Vec<f64> = timings_ms
        .iter()
        .map(|t| t.iter().sum::<f64>() / t.len() as f64)
        .collect();
    let matches: usize = queries
        .iter()
        .map(|q| index.match_count(&vocab.query_terms(q)))
        .sum();
    Ok(BenchReport {
        latency_avg_ms: per_query.iter().sum::<f64>() / per_query.len() as f64,
        latency_p99_ms: nearest_rank_percentile(&per_query, 99.0),
        matches_avg: matches as f64 / queries.len() as f64,
        top1_df_pct: index.top1_df_pct(),
        avg_emb_length: index.avg_doc_length(),
        queries: queries.len(),
        repeats,
        timings_ms,
    })
}

/// Aligned text table, one row per named report.
pub fn format_bench_table(rows: &[(&str, &BenchReport)]) -> String {
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(5);
    let mut out = String::new();
    writeln!(
        out,
        "{:<name_w$}  {:>16}  {:>16}  {:>12}  {:>14}  {:>16}",
        "model", "Latency Avg (ms)", "Latency P99 (ms)", "Matches Avg", "Top@1 Token DF", "Avg. Emb. Length"
    )
    .unwrap();
    for (name, r) in rows {
        writeln!(
            out,
            "{:<name_w$}  {:>16.4}  {:>16.4}  {:>12.1}  {:>13.1}%  {:>16.1}",
            name, r.latency_avg_ms, r.latency_p99_ms, r.matches_avg, r.top1_df_pct, r.avg_emb_length
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::build_index;
    use crate::sparse::SparseVector;

    fn fixture() -> (InvertedIndex, Vocabulary) {
        let vocab = Vocabulary::from_terms(["a", "b", "c"].map(String::from)).unwrap();
        let docs = [
            SparseVector::from_entries("d1", [(0, 1.0), (1, 0.5)], 3).unwrap(),
            SparseVector::from_entries("d2", [(1, 2.0)], 3).unwrap(),
        ];
        (build_index(&docs, 3).unwrap(), vocab)
    }

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (1..=200).map(f64::from).collect();
        assert_eq!(nearest_rank_percentile(&v, 99.0), 198.0);
        assert_eq!(nearest_rank_percentile(&[3.0, 1.0, 2.0], 99.0), 3.0);
        assert_eq!(nearest_rank_percentile(&[5.0], 50.0), 5.0);
    }

    #[test]
    fn report_fields() {
        let (idx, vocab) = fixture();
        let queries = vec!["A".to_string(), "b c".to_string(), "zzz".to_string()];
        let r = bench_latency(&idx, &vocab, &queries, 2, 10).unwrap();
        assert_eq!(r.matches_avg, (1.0 + 2.0 + 0.0) / 3.0);
        assert_eq!(r.top1_df_pct, 100.0);
        assert_eq!(r.avg_emb_length, 1.5);
        assert_eq!(r.timings_ms.len(), 3);
        assert!(r.timings_ms.iter().all(|t| t.len() == 2));
        assert!(r.latency_avg_ms >= 0.0);
        let again = bench_latency(&idx, &vocab, &queries, 1, 10).unwrap();
        assert_eq!(again.matches_avg, r.matches_avg);
        assert!(bench_latency(&idx, &vocab, &[], 1, 10).is_err());
    }

    #[test]
    fn table_has_header_and_rows() {
        let (idx, vocab) = fixture();
        let r = bench_latency(&idx, &vocab, &["a".to_string()], 1, 10).unwrap();
        let t = format_bench_table(&[("flops", &r), ("df_flops", &r)]);
        assert_eq!(t.lines().count(), 3);
        assert!(t.starts_with("model"));
        assert!(t.contains("Top@1 Token DF"));
    }
}
