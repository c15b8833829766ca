//! Command-line front end; every subcommand is a thin wrapper over
//! `dfflops::pipeline`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dfflops::corpus::read_queries;
use dfflops::pipeline::{self, ExperimentConfig};
use dfflops::synth::SynthConfig;
use dfflops::text::Vocabulary;
use dfflops::Result;

#[derive(Parser)]
#[command(name = "dfflops", version, about = "DF-aware sparse retrieval training, indexing and benchmarking")]
struct Cli {
    /// Overrides the seed of commands that train or generate data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel encoding.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Directory receiving artifacts and manifests.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Zipf corpus with train/test queries and qrels.
    Synth {
        #[arg(long, default_value_t = 10_000)]
        num_docs: usize,
        #[arg(long, default_value_t = 2000)]
        word_types: usize,
        #[arg(long, default_value_t = 20_000)]
        train_queries: usize,
        #[arg(long, default_value_t = 500)]
        test_queries: usize,
    },
    /// Build the frozen vocabulary from a JSON-lines corpus.
    BuildVocab {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_df: usize,
    },
    /// Train an encoder from a key=value config file.
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Encode a corpus into sparse vectors.
    Encode {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Keep only the k heaviest terms per document.
        #[arg(long)]
        prune_k: Option<usize>,
    },
    /// Build an inverted index from encoded vectors.
    Index {
        #[arg(long)]
        vectors: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
    },
    /// Print TREC run lines for one query or a query TSV file.
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, conflicts_with = "queries", required_unless_present = "queries")]
        query: Option<String>,
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        #[arg(long, default_value = "dfflops")]
        tag: String,
    },
    /// Score a TREC run against qrels.
    Eval {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
    },
    /// Measure query latency and sparsity diagnostics.
    Bench {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
    /// Top terms by document frequency.
    Stats {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_n: usize,
    },
    /// Train, index and benchmark several regimes end to end.
    Compare {
        /// Experiment config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Synth {
            num_docs,
            word_types,
            train_queries,
            test_queries,
        } => {
            let mut cfg = SynthConfig {
                num_docs,
                word_types,
                ..SynthConfig::default()
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            pipeline::cmd_synth(&cfg, train_queries, test_queries, out)
        }
        Command::BuildVocab { corpus, min_df } => {
            let v = pipeline::cmd_build_vocab(&corpus, min_df, out)?;
            eprintln!("vocabulary: {} terms", v.len());
            Ok(())
        }
        Command::Train { config } => {
            let log = pipeline::cmd_train(&config, cli.seed, out)?;
            if let Some(s) = log.final_snapshot() {
                eprintln!(
                    "trained {} steps; top-1 DF {:.1}%, avg active terms {:.1}",
                    log.steps.len(),
                    s.top1_df_pct,
                    s.avg_active_terms
                );
            }
            Ok(())
        }
        Command::Encode {
            checkpoint,
            vocab,
            corpus,
            prune_k,
        } => {
            let v = pipeline::cmd_encode(&checkpoint, &vocab, &corpus, prune_k, out)?;
            eprintln!("encoded {} documents", v.len());
            Ok(())
        }
        Command::Index { vectors, vocab } => {
            let idx = pipeline::cmd_index(&vectors, &vocab, out)?;
            eprintln!("indexed {} documents, {} postings", idx.doc_count(), idx.total_postings());
            Ok(())
        }
        Command::Search {
            index,
            vocab,
            query,
            queries,
            top_k,
            tag,
        } => {
            let vocab = Vocabulary::load(&vocab)?;
            let index = pipeline::load_index(&index, &vocab)?;
            let pairs = match (query, queries) {
                (Some(text), _) => vec![("query".to_owned(), text)],
                (None, Some(path)) => read_queries(&path)?.into_iter().map(|q| (q.id, q.text)).collect(),
                (None, None) => unreachable!("clap requires one of --query/--queries"),
            };
            print!("{}", pipeline::cmd_search(&index, &vocab, &pairs, top_k, &tag)?);
            Ok(())
        }
        Command::Eval { run, qrels } => {
            print!("{}", pipeline::cmd_eval(&run, &qrels)?);
            Ok(())
        }
        Command::Bench {
            index,
            vocab,
            queries,
            repeats,
            top_k,
        } => {
            let report = pipeline::cmd_bench(&index, &vocab, &queries, repeats, top_k, out)?;
            let name = index.file_stem().and_then(|s| s.to_str()).unwrap_or("index");
            print!("{}", pipeline::bench_table(name, &report));
            Ok(())
        }
        Command::Stats { index, vocab, top_n } => {
            let vocab = Vocabulary::load(&vocab)?;
            let index = pipeline::load_index(&index, &vocab)?;
            print!("{}", pipeline::cmd_stats(&index, &vocab, top_n));
            Ok(())
        }
        Command::Compare { config } => {
            let path = match config {
                Some(p) => p,
                None => write_default_experiment(out)?,
            };
            let report = pipeline::cmd_compare(&path, cli.seed, out, &mut |line| eprintln!("{line}"))?;
            print!("{}", report.table());
            Ok(())
        }
    }
}

/// Materializes the built-in experiment so the manifest can digest it.
fn write_default_experiment(out: &Path) -> Result<PathBuf> {
    let path = out.join("experiment.conf");
    let text = format!("# built-in default experiment\n{}", ExperimentConfig::default().to_config_text());
    std::fs::create_dir_all(out).map_err(|e| dfflops::Error::io(out, e))?;
    std::fs::write(&path, text).map_err(|e| dfflops::Error::io(&path, e))?;
    Ok(path)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global() {
        eprintln!("error[invalid-argument]: thread pool: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}
