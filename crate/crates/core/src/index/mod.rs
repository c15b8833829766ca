//! Inverted index over learned sparse vectors with exhaustive scoring.
//!
//! Every document that shares at least one term with the query is scored:
//! there is no dynamic pruning, so the number of matched documents is the
//! work a query costs. Postings store 32-bit weights; scores accumulate in
//! `f64` in ascending term order, the same order [`sparse_dot`] uses, so the
//! engine and the brute-force oracle agree bit for bit.

mod io;
mod vectors;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{sparse_dot, SparseVector, TermId, TermSet};

pub use vectors::{read_vectors, write_vectors};

/// Keeps the `k` highest-weighted entries; ties go to the smaller term id.
pub fn prune_topk(vector: &SparseVector, k: usize) -> Result<SparseVector> {
    if k == 0 {
        return Err(Error::InvalidArgument("prune k must be >= 1".into()));
    }
    if vector.len() <= k {
        return Ok(vector.clone());
    }
    let mut kept: Vec<(TermId, f64)> = vector.entries().to_vec();
    kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    kept.truncate(k);
    kept.sort_by_key(|&(t, _)| t);
    Ok(SparseVector::from_sorted_unchecked(vector.doc_id().to_owned(), kept))
}

/// Postings of one term, ascending by internal document number.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PostingList {
    pub term: TermId,
    pub postings: Vec<(u32, f32)>,
}

impl PostingList {
    pub fn len(&self) -> usize {
        self.postings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }
}

/// Immutable term → postings map. Documents are numbered by build order.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    dim: usize,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    lists: Vec<PostingList>,
}

/// Builds the index; document `i` of `docs` gets internal number `i`.
pub fn build_index(docs: &[SparseVector], dim: usize) -> Result<InvertedIndex> {
    if docs.is_empty() {
        return Err(Error::EmptyInput("index corpus"));
    }
    if docs.len() > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many documents".into()));
    }
    let mut seen = HashSet::with_capacity(docs.len());
    let mut lists: Vec<PostingList> = (0..dim as TermId)
        .map(|term| PostingList { term, postings: Vec::new() })
        .collect();
    let mut doc_lengths = Vec::with_capacity(docs.len());
    for (n, doc) in docs.iter().enumerate() {
        if !seen.insert(doc.doc_id()) {
            return Err(Error::DuplicateDocId(doc.doc_id().to_owned()));
        }
        let mut len = 0u32;
        for &(t, w) in doc.entries() {
            let list = lists
                .get_mut(t as usize)
                .ok_or(Error::TermOutOfRange { term: t, dim })?;
            let w = w as f32;
            if w > 0.0 {
                list.postings.push((n as u32, w));
                len += 1;
            }
        }
        doc_lengths.push(len);
    }
    Ok(InvertedIndex {
        dim,
        doc_ids: docs.iter().map(|d| d.doc_id().to_owned()).collect(),
        doc_lengths,
        lists,
    })
}

/// One scored document.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub doc: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchResult {
    /// Best first; equal scores ordered by ascending document number.
    pub hits: Vec<Hit>,
    /// Documents sharing at least one term with the query; all were scored.
    pub matches: usize,
}

fn rank_hits(mut scored: Vec<Hit>, top_k: usize) -> Vec<Hit> {
    let cmp = |a: &Hit, b: &Hit| b.score.total_cmp(&a.score).then(a.doc.cmp(&b.doc));
    if scored.len() > top_k {
        scored.select_nth_unstable_by(top_k, cmp);
        scored.truncate(top_k);
    }
    scored.sort_by(cmp);
    scored
}

impl InvertedIndex {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn doc_count(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn doc_id(&self, doc: u32) -> &str {
        &self.doc_ids[doc as usize]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_lengths(&self) -> &[u32] {
        &self.doc_lengths
    }

    pub fn postings(&self, term: TermId) -> Option<&PostingList> {
        self.lists.get(term as usize)
    }

    pub fn lists(&self) -> &[PostingList] {
        &self.lists
    }

    pub fn total_postings(&self) -> usize {
        self.lists.iter().map(PostingList::len).sum()
    }

    /// Mean number of indexed terms per document.
    pub fn avg_doc_length(&self) -> f64 {
        self.doc_lengths.iter().map(|&l| l as f64).sum::<f64>() / self.doc_count() as f64
    }

    fn query_lists<'a>(&'a self, query: &'a TermSet) -> impl Iterator<Item = &'a PostingList> + 'a {
        query.iter().filter_map(|&t| self.lists.get(t as usize))
    }

    /// Size of the union of the query terms' posting lists.
    pub fn match_count(&self, query: &TermSet) -> usize {
        let mut hit = vec![false; self.doc_count()];
        let mut count = 0;
        for list in self.query_lists(query) {
            for &(d, _) in &list.postings {
                let slot = &mut hit[d as usize];
                if !*slot {
                    *slot = true;
                    count += 1;
                }
            }
        }
        count
    }

    /// Exact top-`top_k` by accumulated posting weight over the full union.
    pub fn search(&self, query: &TermSet, top_k: usize) -> Result<SearchResult> {
        if top_k == 0 {
            return Err(Error::InvalidArgument("top_k must be >= 1".into()));
        }
        let mut acc = vec![0.0f64; self.doc_count()];
        let mut touched: Vec<u32> = Vec::new();
        for list in self.query_lists(query) {
            for &(d, w) in &list.postings {
                let slot = &mut acc[d as usize];
                if *slot == 0.0 {
                    touched.push(d);
                }
                *slot += w as f64;
            }
        }
        let matches = touched.len();
        let scored = touched
            .into_iter()
            .map(|doc| Hit { doc, score: acc[doc as usize] })
            .collect();
        Ok(SearchResult {
            hits: rank_hits(scored, top_k),
            matches,
        })
    }

    /// The `top_n` terms with the longest posting lists.
    pub fn df_report(&self, top_n: usize) -> Vec<DfEntry> {
        let mut all: Vec<DfEntry> = self
            .lists
            .iter()
            .map(|l| DfEntry {
                term: l.term,
                df: l.len(),
                df_pct: 100.0 * l.len() as f64 / self.doc_count() as f64,
            })
            .collect();
        all.sort_by(|a, b| b.df.cmp(&a.df).then(a.term.cmp(&b.term)));
        all.truncate(top_n);
        all
    }

    /// DF% of the most frequent indexed term.
    pub fn top1_df_pct(&self) -> f64 {
        self.df_report(1).first().map_or(0.0, |e| e.df_pct)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfEntry {
    pub term: TermId,
    pub df: usize,
    pub df_pct: f64,
}

/// Reference search: scores every document with [`sparse_dot`] on its
/// 32-bit-rounded weights. Same ordering rules as [`InvertedIndex::search`].
pub fn brute_force_search(docs: &[SparseVector], query: &TermSet, top_k: usize) -> Result<SearchResult> {
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be >= 1".into()));
    }
    let mut scored = Vec::new();
    for (n, doc) in docs.iter().enumerate() {
        let doc = doc.to_f32_precision();
        if query.iter().any(|&t| doc.weight(t) > 0.0) {
            scored.push(Hit {
                doc: n as u32,
                score: sparse_dot(query, &doc),
            });
        }
    }
    let matches = scored.len();
    Ok(SearchResult {
        hits: rank_hits(scored, top_k),
        matches,
    })
}
