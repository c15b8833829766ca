//! Builds an index from a handful of vectors, searches it, and checks the
//! result against brute-force scoring.
//!
//! `cargo run --example index_and_search`

use dfflops::index::{brute_force_search, build_index, prune_topk};
use dfflops::sparse::{SparseVector, TermSet};

fn main() -> dfflops::Result<()> {
    let docs = vec![
        SparseVector::from_entries("a", [(0, 0.2), (1, 1.5), (3, 0.7)], 5)?,
        SparseVector::from_entries("b", [(0, 0.9), (2, 2.0)], 5)?,
        SparseVector::from_entries("c", [(0, 0.1), (1, 0.4), (2, 0.3), (4, 1.1)], 5)?,
    ];
    let index = build_index(&docs, 5)?;
    let query: TermSet = [0, 1].into_iter().collect();
    let res = index.search(&query, 10)?;
    println!("query {query:?}: {} matching documents", res.matches);
    for h in &res.hits {
        println!("  {} {:.3}", index.doc_id(h.doc), h.score);
    }
    assert_eq!(res, brute_force_search(&docs, &query, 10)?);

    let pruned: Vec<SparseVector> = docs.iter().map(|d| prune_topk(d, 1)).collect::<dfflops::Result<_>>()?;
    let small = build_index(&pruned, 5)?;
    println!(
        "pruned to 1 term per document: {} postings (was {}), {} matches",
        small.total_postings(),
        index.total_postings(),
        small.match_count(&query)
    );
    for e in index.df_report(3) {
        println!("  term {} df {} ({:.0}%)", e.term, e.df, e.df_pct);
    }
    Ok(())
}
