//! Generates a small Zipf corpus and shows its head terms and a few queries.
//!
//! `cargo run --example synthetic_corpus`

use dfflops::synth::{generate_corpus, generate_queries, token_df, SynthConfig};

fn main() -> dfflops::Result<()> {
    let cfg = SynthConfig {
        num_docs: 2000,
        ..SynthConfig::default()
    };
    let docs = generate_corpus(&cfg)?;
    let mut df: Vec<(String, usize)> = token_df(&docs).into_iter().collect();
    df.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    println!("{} documents, {} distinct tokens", docs.len(), df.len());
    for (term, n) in df.iter().take(5) {
        println!("  {term:<8} in {:5.1}% of documents", 100.0 * *n as f64 / docs.len() as f64);
    }
    println!("\n{}: {}", docs[0].id, docs[0].text);
    for q in generate_queries(&docs, &cfg, 5, "q", 1)? {
        println!("{}\t{:<40}\t-> {}", q.id, q.text, q.positive_doc_id);
    }
    Ok(())
}
