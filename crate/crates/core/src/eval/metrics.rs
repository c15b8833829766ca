//! Ranked-retrieval quality metrics over TREC-style runs and judgments.
//!
//! Every metric averages over the queries of the qrels that have at least
//! one document with grade > 0. A judged query missing from the run
//! scores 0.

use std::collections::BTreeMap;

/// Graded judgments: query id → doc id → grade.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    pub judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn insert(&mut self, query: impl Into<String>, doc: impl Into<String>, grade: u32) {
        self.judgments
            .entry(query.into())
            .or_default()
            .insert(doc.into(), grade);
    }

    fn grade(&self, query: &str, doc: &str) -> u32 {
        self.judgments
            .get(query)
            .and_then(|m| m.get(doc))
            .copied()
            .unwrap_or(0)
    }

    /// Queries with at least one relevant document.
    fn judged(&self) -> impl Iterator<Item = (&str, &BTreeMap<String, u32>)> {
        self.judgments
            .iter()
            .filter(|(_, docs)| docs.values().any(|&g| g > 0))
            .map(|(q, docs)| (q.as_str(), docs))
    }
}

/// Ranked documents per query, best first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    pub rankings: BTreeMap<String, Vec<(String, f64)>>,
}

impl Run {
    pub fn insert(&mut self, query: impl Into<String>, ranking: Vec<(String, f64)>) {
        self.rankings.insert(query.into(), ranking);
    }

    fn top_k(&self, query: &str, k: usize) -> &[(String, f64)] {
        match self.rankings.get(query) {
            Some(r) => &r[..r.len().min(k)],
            None => &[],
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Mean reciprocal rank of the first relevant document within the top `k`.
pub fn mrr_at_k(run: &Run, qrels: &Qrels, k: usize) -> f64 {
    mean(qrels.judged().map(|(q, _)| {
        run.top_k(q, k)
            .iter()
            .position(|(d, _)| qrels.grade(q, d) > 0)
            .map_or(0.0, |i| 1.0 / (i + 1) as f64)
    }))
}

/// Mean fraction of relevant documents retrieved in the top `k`.
pub fn recall_at_k(run: &Run, qrels: &Qrels, k: usize) -> f64 {
    mean(qrels.judged().map(|(q, docs)| {
        let relevant = docs.values().filter(|&&g| g > 0).count();
        let found = run
            .top_k(q, k)
            .iter()
            .filter(|(d, _)| qrels.grade(q, d) > 0)
            .count();
        found as f64 / relevant as f64
    }))
}

fn dcg(grades: impl Iterator<Item = u32>) -> f64 {
    grades
        .enumerate()
        .map(|(i, g)| (2f64.powi(g as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum()
}

/// Graded nDCG with gain `2^grade − 1` and `log2(rank + 1)` discount.
pub fn ndcg_at_k(run: &Run, qrels: &Qrels, k: usize) -> f64 {
    mean(qrels.judged().map(|(q, docs)| {
        let mut ideal: Vec<u32> = docs.values().copied().collect();
        ideal.sort_unstable_by(|a, b| b.cmp(a));
        let idcg = dcg(ideal.into_iter().take(k));
        let got = dcg(run.top_k(q, k).iter().map(|(d, _)| qrels.grade(q, d)));
        got / idcg
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_of(q: &str, docs: &[&str]) -> Run {
        let mut r = Run::default();
        r.insert(q, docs.iter().enumerate().map(|(i, d)| (d.to_string(), -(i as f64))).collect());
        r
    }

    fn single(q: &str, d: &str) -> Qrels {
        let mut qr = Qrels::default();
        qr.insert(q, d, 1);
        qr
    }

    #[test]
    fn mrr_examples() {
        let run = run_of("q", &["a", "b", "rel", "c"]);
        assert!((mrr_at_k(&run, &single("q", "rel"), 10) - 1.0 / 3.0).abs() < 1e-15);
        let docs: Vec<String> = (0..10).map(|i| format!("n{i}")).chain(["rel".to_string()]).collect();
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        assert_eq!(mrr_at_k(&run_of("q", &refs), &single("q", "rel"), 10), 0.0);
        assert_eq!(mrr_at_k(&run_of("q", &refs), &single("q", "rel"), 11), 1.0 / 11.0);
    }

    #[test]
    fn recall_examples() {
        let mut qrels = single("q", "a");
        qrels.insert("q", "b", 2);
        assert_eq!(recall_at_k(&run_of("q", &["b", "x", "a"]), &qrels, 3), 1.0);
        assert_eq!(recall_at_k(&run_of("q", &["x", "y"]), &qrels, 3), 0.0);
        assert_eq!(recall_at_k(&run_of("q", &["b", "x", "a"]), &qrels, 2), 0.5);
    }

    #[test]
    fn ndcg_examples() {
        let mut qrels = Qrels::default();
        qrels.insert("q", "a", 3);
        qrels.insert("q", "b", 1);
        assert!((ndcg_at_k(&run_of("q", &["a", "b", "c"]), &qrels, 10) - 1.0).abs() < 1e-15);
        assert_eq!(ndcg_at_k(&run_of("q", &["rel"]), &single("q", "rel"), 1), 1.0);
        // reversed order: (1/1 + 7/log2 3) / (7/1 + 1/log2 3)
        let expected = (1.0 + 7.0 / 3f64.log2()) / (7.0 + 1.0 / 3f64.log2());
        assert!((ndcg_at_k(&run_of("q", &["b", "a"]), &qrels, 10) - expected).abs() < 1e-15);
    }

    #[test]
    fn unjudged_queries_are_excluded() {
        let mut qrels = single("q1", "a");
        qrels.insert("q2", "b", 0);
        let run = run_of("q1", &["a"]);
        assert_eq!(mrr_at_k(&run, &qrels, 10), 1.0);
        assert_eq!(ndcg_at_k(&run, &qrels, 10), 1.0);
        // judged but absent from the run counts as zero
        qrels.insert("q3", "c", 1);
        assert_eq!(mrr_at_k(&run, &qrels, 10), 0.5);
        assert_eq!(mrr_at_k(&Run::default(), &Qrels::default(), 10), 0.0);
    }
}
