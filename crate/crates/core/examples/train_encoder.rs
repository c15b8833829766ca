//! Trains the same encoder under FLOPS and DF-FLOPS and follows the
//! top-1 DF of the document representations during training.
//!
//! `cargo run --release --example train_encoder`

use dfflops::encoder::{train, Init, Optimizer, Regularizer, TrainConfig, TrainingData};
use dfflops::synth::{generate_corpus, generate_queries, SynthConfig};
use dfflops::text::{build_vocab, tokenize};

fn main() -> dfflops::Result<()> {
    let synth = SynthConfig {
        num_docs: 3000,
        ..SynthConfig::default()
    };
    let docs = generate_corpus(&synth)?;
    let queries = generate_queries(&docs, &synth, 5000, "t", 1)?;
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.text)).collect();
    let vocab = build_vocab(&tokens, 2)?;
    let data = TrainingData::from_corpus(&docs, &queries, &vocab)?;

    for (reg, lambda) in [(Regularizer::Flops, 0.1), (Regularizer::DfFlops, 1.0)] {
        let config = TrainConfig {
            regularizer: reg,
            peak_lambda: lambda,
            optimizer: Optimizer::Adam,
            init: Init::Tied,
            learning_rate: 0.003,
            batch_size: 64,
            hard_negatives: 1,
            total_steps: 600,
            warmup_steps: 360,
            df_refresh_interval: 10,
            df_sample_size: 1024,
            ..TrainConfig::default()
        };
        let (_, log) = train(&config, &data)?;
        println!("{reg} (peak lambda {lambda})");
        for s in log.snapshots.iter().step_by(10) {
            println!(
                "  step {:4}  top-1 DF {:5.1}%  avg active terms {:6.1}",
                s.step, s.top1_df_pct, s.avg_active_terms
            );
        }
        let last = log.steps.last().expect("at least one step");
        println!("  final rank loss {:.4}, regularizer {:.4}", last.rank_loss, last.reg_loss);
    }
    Ok(())
}
