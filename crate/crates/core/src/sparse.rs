//! Sparse term-weight vectors and the binary-query scoring rule.
//!
//! A [`SparseVector`] holds `(TermId, weight)` entries sorted by term id with
//! strictly positive weights. Zero weights are never stored, so the entry
//! count is the number of active terms of the representation.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Dense index into a [`Vocabulary`](crate::text::Vocabulary).
pub type TermId = u32;

/// A binary bag of query terms. Ordered so scoring sums in a fixed order.
pub type TermSet = BTreeSet<TermId>;

/// Term-weight map for one document, sorted by term id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    doc_id: String,
    entries: Vec<(TermId, f64)>,
}

impl SparseVector {
    pub fn empty(doc_id: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            entries: Vec::new(),
        }
    }

    /// Builds a vector from unordered entries.
    ///
    /// Entries with weight `<= 0` are dropped. Fails on a repeated term,
    /// a non-finite or negative weight, or a term id `>= dim`.
    pub fn from_entries(
        doc_id: impl Into<String>,
        entries: impl IntoIterator<Item = (TermId, f64)>,
        dim: usize,
    ) -> Result<Self> {
        let mut entries: Vec<(TermId, f64)> = entries.into_iter().collect();
        for &(term, w) in &entries {
            if term as usize >= dim {
                return Err(Error::TermOutOfRange { term, dim });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "weight {w} for term {term} is not a finite non-negative number"
                )));
            }
        }
        entries.retain(|&(_, w)| w > 0.0);
        entries.sort_by_key(|&(t, _)| t);
        if let Some(pair) = entries.windows(2).find(|p| p[0].0 == p[1].0) {
            return Err(Error::InvalidArgument(format!(
                "term {} appears twice",
                pair[0].0
            )));
        }
        Ok(Self {
            doc_id: doc_id.into(),
            entries,
        })
    }

    /// Wraps entries already sorted by strictly increasing term id with positive weights.
    pub(crate) fn from_sorted_unchecked(doc_id: String, entries: Vec<(TermId, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|p| p[0].0 < p[1].0));
        debug_assert!(entries.iter().all(|&(_, w)| w > 0.0));
        Self { doc_id, entries }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Weight of `term`, `0.0` when absent.
    pub fn weight(&self, term: TermId) -> f64 {
        match self.entries.binary_search_by_key(&term, |&(t, _)| t) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    /// Rounds every weight to 32-bit precision, the precision the index stores.
    pub fn to_f32_precision(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&(t, w)| (t, w as f32 as f64))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        Self::from_sorted_unchecked(self.doc_id.clone(), entries)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(t, w) in &self.entries {
            out[t as usize] = w;
        }
        out
    }

    pub fn with_doc_id(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = doc_id.into();
        self
    }
}

/// A batch of `N >= 1` document vectors over a vocabulary of size `dim`.
#[derive(Debug, Clone)]
pub struct DocBatch {
    vectors: Vec<SparseVector>,
    dim: usize,
}

impl DocBatch {
    pub fn new(vectors: Vec<SparseVector>, dim: usize) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyInput("document batch"));
        }
        for v in &vectors {
            if let Some(&(term, _)) = v.entries().last() {
                if term as usize >= dim {
                    return Err(Error::TermOutOfRange { term, dim });
                }
            }
        }
        Ok(Self { vectors, dim })
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Score of a document under a binary query: the sum of the document's
/// weights on the query terms. Terms are summed in ascending id order.
pub fn sparse_dot(query_terms: &TermSet, doc: &SparseVector) -> f64 {
    let entries = doc.entries();
    let mut score = 0.0;
    let mut cursor = 0;
    for &term in query_terms {
        // Both sides are sorted, so the search window only shrinks.
        match entries[cursor..].binary_search_by_key(&term, |&(t, _)| t) {
            Ok(i) => {
                score += entries[cursor + i].1;
                cursor += i + 1;
            }
            Err(i) => cursor += i,
        }
        if cursor >= entries.len() {
            break;
        }
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vec_of(entries: &[(TermId, f64)]) -> SparseVector {
        SparseVector::from_entries("d", entries.iter().copied(), 16).unwrap()
    }

    #[test]
    fn dot_sums_matched_weights() {
        let doc = vec_of(&[(1, 0.5), (3, 2.0)]);
        let q: TermSet = [1, 2].into_iter().collect();
        assert_eq!(sparse_dot(&q, &doc), 0.5);
    }

    #[test]
    fn dot_with_empty_query_is_zero() {
        let doc = vec_of(&[(1, 0.5), (3, 2.0)]);
        assert_eq!(sparse_dot(&TermSet::new(), &doc), 0.0);
    }

    #[test]
    fn from_entries_sorts_and_drops_zeros() {
        let v = vec_of(&[(5, 1.0), (2, 0.0), (1, 3.0)]);
        assert_eq!(v.entries(), &[(1, 3.0), (5, 1.0)]);
        assert_eq!(v.weight(2), 0.0);
        assert_eq!(v.weight(5), 1.0);
    }

    #[test]
    fn from_entries_rejects_bad_input() {
        assert!(SparseVector::from_entries("d", [(16, 1.0)], 16).is_err());
        assert!(SparseVector::from_entries("d", [(1, -1.0)], 16).is_err());
        assert!(SparseVector::from_entries("d", [(1, f64::NAN)], 16).is_err());
        assert!(SparseVector::from_entries("d", [(1, 1.0), (1, 2.0)], 16).is_err());
    }

    #[test]
    fn empty_batch_is_rejected() {
        assert!(DocBatch::new(vec![], 4).is_err());
    }

    proptest! {
        #[test]
        fn dot_equals_dense_binary_inner_product(
            doc in prop::collection::btree_map(0u32..64, 0.01f64..5.0, 0..40),
            query in prop::collection::btree_set(0u32..64, 0..20),
        ) {
            let v = SparseVector::from_entries("d", doc.into_iter(), 64).unwrap();
            let dense = v.to_dense(64);
            let mut expected = 0.0;
            for t in 0..64u32 {
                let indicator = if query.contains(&t) { 1.0 } else { 0.0 };
                expected += indicator * dense[t as usize];
            }
            prop_assert!((sparse_dot(&query, &v) - expected).abs() <= 1e-12 * (1.0 + expected));
        }
    }
}
