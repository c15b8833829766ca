//! Scores a TREC run against qrels.
//!
//! `cargo run --example evaluate_run`

use std::path::Path;

use dfflops::eval::{mrr_at_k, ndcg_at_k, parse_qrels, parse_run, recall_at_k};

const RUN: &str = "\
q1 Q0 d7 1 9.1 demo
q1 Q0 d3 2 8.0 demo
q1 Q0 d1 3 2.5 demo
q2 Q0 d2 1 4.0 demo
q3 Q0 d9 1 1.0 demo
";

const QRELS: &str = "\
q1 0 d3 1
q2 0 d2 1
q2 0 d5 1
q3 0 d4 1
";

fn main() -> dfflops::Result<()> {
    let run = parse_run(RUN, Path::new("demo.run"))?;
    let qrels = parse_qrels(QRELS, Path::new("demo.qrels"))?;
    // q1 first hit at rank 2, q2 at rank 1, q3 never
    println!("MRR@10     {:.4}", mrr_at_k(&run, &qrels, 10));
    println!("Recall@100 {:.4}", recall_at_k(&run, &qrels, 100));
    println!("nDCG@10    {:.4}", ndcg_at_k(&run, &qrels, 10));
    Ok(())
}
