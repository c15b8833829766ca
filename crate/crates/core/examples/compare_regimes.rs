//! A scaled-down regime comparison: FLOPS, FLOPS with pruning, and DF-FLOPS
//! on a 3K-document corpus with one seed.
//!
//! `cargo run --release --example compare_regimes`

use dfflops::encoder::Regularizer;
use dfflops::pipeline::compare::run_experiment;
use dfflops::pipeline::{ExperimentConfig, RegimeSpec};

fn main() -> dfflops::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.synth.num_docs = 3000;
    cfg.train_queries = 6000;
    cfg.seeds = vec![0];
    cfg.train.total_steps = 800;
    cfg.train.warmup_steps = 480;
    cfg.regimes = vec![
        RegimeSpec::new("flops", Regularizer::Flops, &[1e-3, 1e-1], None),
        RegimeSpec::new("flops+prune50", Regularizer::Flops, &[1e-3, 1e-1], Some(50)),
        RegimeSpec::new("df_flops", Regularizer::DfFlops, &[0.3, 1.0], None),
    ];
    let report = run_experiment(&cfg, &mut |line| eprintln!("{line}"))?;
    print!("{}", report.table());
    Ok(())
}
