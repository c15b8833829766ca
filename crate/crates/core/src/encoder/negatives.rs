//! Lexical-overlap hard-negative mining.
//!
//! Stands in for BM25 negatives: non-relevant documents are ranked by how
//! many distinct query terms they contain, then by the total count of those
//! terms, then by corpus position.

use crate::sparse::{SparseVector, TermId, TermSet};

/// Term → `(doc index, count)` lists over raw count vectors.
pub(crate) struct RawPostings {
    lists: Vec<Vec<(usize, f64)>>,
}

impl RawPostings {
    pub fn build(docs: &[SparseVector], dim: usize) -> Self {
        let mut lists = vec![Vec::new(); dim];
        for (d, v) in docs.iter().enumerate() {
            for &(t, c) in v.entries() {
                lists[t as usize].push((d, c));
            }
        }
        Self { lists }
    }

    fn list(&self, t: TermId) -> &[(usize, f64)] {
        self.lists.get(t as usize).map_or(&[], Vec::as_slice)
    }
}

/// The `pool_size` highest-overlap documents for `query`, excluding every
/// document whose id equals the positive's.
pub(crate) fn overlap_pool(
    postings: &RawPostings,
    docs: &[SparseVector],
    query: &TermSet,
    positive: usize,
    pool_size: usize,
) -> Vec<usize> {
    let mut overlap = vec![(0u32, 0.0f64); docs.len()];
    let mut touched = Vec::new();
    for &t in query {
        for &(d, c) in postings.list(t) {
            let e = &mut overlap[d];
            if e.0 == 0 {
                touched.push(d);
            }
            e.0 += 1;
            e.1 += c;
        }
    }
    let positive_id = docs[positive].doc_id();
    touched.retain(|&d| docs[d].doc_id() != positive_id);
    let order = |a: &usize, b: &usize| {
        let (x, y) = (overlap[*a], overlap[*b]);
        y.0.cmp(&x.0).then(y.1.total_cmp(&x.1)).then(a.cmp(b))
    };
    if touched.len() > pool_size && pool_size > 0 {
        touched.select_nth_unstable_by(pool_size - 1, order);
    }
    touched.truncate(pool_size);
    touched.sort_by(order);
    touched
}
