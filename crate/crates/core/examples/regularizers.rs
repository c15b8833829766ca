//! FLOPS versus DF-FLOPS on one hand-made batch: a stopword-like term that
//! every document uses, and a rare term.
//!
//! `cargo run --example regularizers`

use dfflops::df::DfTable;
use dfflops::reg::{df_flops_loss, flops_loss, penalty_weights, ActivationParams, PenaltyWeights};
use dfflops::sparse::{DocBatch, SparseVector};

fn main() -> dfflops::Result<()> {
    // term 0 is in all 4 documents, term 1 in one
    let docs = (0..4)
        .map(|i| {
            let mut e = vec![(0, 1.0)];
            if i == 0 {
                e.push((1, 2.0));
            }
            SparseVector::from_entries(format!("d{i}"), e, 2)
        })
        .collect::<dfflops::Result<Vec<_>>>()?;
    let batch = DocBatch::new(docs, 2)?;

    let flops = flops_loss(&batch);
    println!("FLOPS     loss {:.4}  grad term0 {:.4}  term1 {:.4}", flops.loss, flops.grad(0), flops.grad(1));

    let ones = df_flops_loss(&batch, &PenaltyWeights::ones(2))?;
    println!("w = 1     loss {:.4}  (identical to FLOPS: {})", ones.loss, ones.loss == flops.loss);

    // corpus of 100 docs: term 0 in 90, term 1 in 2
    let df = DfTable::from_counts(vec![90, 2], 100, 0.0)?;
    let w = penalty_weights(&df, &ActivationParams::default());
    let res = df_flops_loss(&batch, &w)?;
    println!(
        "DF-FLOPS  loss {:.4}  grad term0 {:.4}  term1 {:.6}  (w = {:.4}, {:.6})",
        res.loss,
        res.grad(0),
        res.grad(1),
        w.get(0),
        w.get(1)
    );
    Ok(())
}
