//! Contrastive ranking loss over binary queries.
//!
//! Each query is scored against its positive, the positives of every other
//! query in the batch (in-batch negatives), and its own hard negatives.
//! The loss is the softmax cross-entropy of the positive, averaged over
//! queries.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::sparse::{sparse_dot, SparseVector, TermId, TermSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RankLossOutput {
    pub loss: f64,
    /// Per document of the batch, `(t, ∂loss/∂r_{d,t})` ascending by term.
    /// Only query terms of queries the document is a candidate for appear.
    pub doc_grads: Vec<Vec<(TermId, f64)>>,
}

/// Candidate document indices for query `i`: positive first, then in-batch
/// negatives in query order, then hard negatives. Documents that share the
/// positive's id, or repeat an earlier candidate's id, are skipped.
pub fn candidates(
    i: usize,
    docs: &[SparseVector],
    positives: &[usize],
    hard_negatives: &[usize],
) -> Vec<usize> {
    let pos = positives[i];
    let mut seen: HashSet<&str> = HashSet::new();
    seen.insert(docs[pos].doc_id());
    let mut out = vec![pos];
    let others = positives
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &p)| p);
    for d in others.chain(hard_negatives.iter().copied()) {
        if seen.insert(docs[d].doc_id()) {
            out.push(d);
        }
    }
    out
}

/// Mean softmax cross-entropy of each query's positive among its candidates,
/// with the exact gradient with respect to every document weight.
pub fn rank_loss(
    queries: &[TermSet],
    docs: &[SparseVector],
    positives: &[usize],
    hard_negatives: &[Vec<usize>],
) -> Result<RankLossOutput> {
    if queries.is_empty() {
        return Err(Error::EmptyInput("query batch"));
    }
    if positives.len() != queries.len() {
        return Err(Error::MissingPositive(format!(
            "#{} of {}",
            positives.len().min(queries.len()),
            queries.len()
        )));
    }
    if hard_negatives.len() != queries.len() {
        return Err(Error::InvalidArgument(format!(
            "{} hard-negative lists for {} queries",
            hard_negatives.len(),
            queries.len()
        )));
    }
    if let Some(i) = positives.iter().position(|&p| p >= docs.len()) {
        return Err(Error::MissingPositive(format!("#{i}")));
    }
    if let Some(&d) = hard_negatives.iter().flatten().find(|&&d| d >= docs.len()) {
        return Err(Error::InvalidArgument(format!("negative index {d} out of range")));
    }

    let nq = queries.len() as f64;
    let mut grads: Vec<BTreeMap<TermId, f64>> = vec![BTreeMap::new(); docs.len()];
    let mut loss = 0.0;
    for (i, query) in queries.iter().enumerate() {
        let cands = candidates(i, docs, positives, &hard_negatives[i]);
        let scores: Vec<f64> = cands.iter().map(|&d| sparse_dot(query, &docs[d])).collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        loss += z.ln() + max - scores[0];
        for (c, (&d, e)) in cands.iter().zip(&exps).enumerate() {
            let target = if c == 0 { 1.0 } else { 0.0 };
            let ds = (e / z - target) / nq;
            if ds == 0.0 {
                continue;
            }
            for &t in query {
                *grads[d].entry(t).or_default() += ds;
            }
        }
    }
    Ok(RankLossOutput {
        loss: loss / nq,
        doc_grads: grads.into_iter().map(|m| m.into_iter().collect()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, entries: &[(TermId, f64)]) -> SparseVector {
        SparseVector::from_entries(id, entries.iter().copied(), 8).unwrap()
    }

    fn q(terms: &[TermId]) -> TermSet {
        terms.iter().copied().collect()
    }

    #[test]
    fn saturated_softmax_has_near_zero_loss() {
        let docs = vec![doc("p", &[(1, 25.0)]), doc("n1", &[(1, 1.0)]), doc("n2", &[])];
        let out = rank_loss(&[q(&[1])], &docs, &[0], &[vec![1, 2]]).unwrap();
        assert!(out.loss < 1e-8, "{}", out.loss);
    }

    #[test]
    fn uniform_scores_give_log_m() {
        let docs = vec![doc("a", &[(1, 1.0)]), doc("b", &[(1, 1.0)]), doc("c", &[(1, 1.0)]), doc("d", &[(1, 1.0)])];
        let out = rank_loss(&[q(&[1])], &docs, &[0], &[vec![1, 2, 3]]).unwrap();
        assert!((out.loss - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn in_batch_negatives_are_other_positives() {
        let docs = vec![doc("a", &[]), doc("b", &[]), doc("c", &[])];
        assert_eq!(candidates(0, &docs, &[0, 1], &[2]), vec![0, 1, 2]);
        assert_eq!(candidates(1, &docs, &[0, 1], &[]), vec![1, 0]);
        // a hard negative with the positive's id is dropped
        let docs = vec![doc("a", &[]), doc("b", &[]), doc("a", &[])];
        assert_eq!(candidates(0, &docs, &[0, 1], &[2, 1]), vec![0, 1]);
    }

    #[test]
    fn missing_positive_is_an_error() {
        let docs = vec![doc("a", &[])];
        assert!(matches!(
            rank_loss(&[q(&[1]), q(&[2])], &docs, &[0], &[vec![], vec![]]),
            Err(Error::MissingPositive(_))
        ));
        assert!(rank_loss(&[q(&[1])], &docs, &[3], &[vec![]]).is_err());
    }

    #[test]
    fn gradient_pushes_positive_up() {
        let docs = vec![doc("p", &[(1, 1.0)]), doc("n", &[(1, 1.0)])];
        let out = rank_loss(&[q(&[1, 2])], &docs, &[0], &[vec![1]]).unwrap();
        assert_eq!(out.doc_grads[0], vec![(1, -0.5), (2, -0.5)]);
        assert_eq!(out.doc_grads[1], vec![(1, 0.5), (2, 0.5)]);
    }
}
