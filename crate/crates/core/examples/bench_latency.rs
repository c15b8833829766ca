//! Latency and match counts of two synthetic indexes: one where a single
//! term sits in every document, one without it.
//!
//! `cargo run --release --example bench_latency`

use dfflops::eval::{bench_latency, format_bench_table};
use dfflops::index::build_index;
use dfflops::sparse::SparseVector;
use dfflops::text::Vocabulary;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dfflops::Result<()> {
    let dim = 500;
    let vocab = Vocabulary::from_terms((0..dim).map(|t| format!("t{t:03}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut with_common = Vec::new();
    let mut without = Vec::new();
    for i in 0..20_000 {
        let mut e: Vec<(u32, f64)> = (0..20).map(|_| (rng.random_range(1..dim as u32), rng.random_range(0.1..2.0))).collect();
        e.sort_by_key(|x| x.0);
        e.dedup_by_key(|x| x.0);
        without.push(SparseVector::from_entries(format!("d{i}"), e.clone(), dim)?);
        e.insert(0, (0, 0.05));
        with_common.push(SparseVector::from_entries(format!("d{i}"), e, dim)?);
    }
    let queries: Vec<String> = (0..300)
        .map(|_| {
            let mut q: Vec<String> = (0..3).map(|_| format!("t{:03}", rng.random_range(1..dim))).collect();
            q.push("t000".into());
            q.join(" ")
        })
        .collect();
    let a = bench_latency(&build_index(&with_common, dim)?, &vocab, &queries, 3, 10)?;
    let b = bench_latency(&build_index(&without, dim)?, &vocab, &queries, 3, 10)?;
    print!("{}", format_bench_table(&[("common term", &a), ("no common term", &b)]));
    Ok(())
}
