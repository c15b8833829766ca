//! One function per CLI subcommand.
//!
//! Commands that produce artifacts write them into `out_dir` under fixed
//! names and record a `<command>.manifest.json` next to them. Commands that
//! only report (`search`, `eval`, `stats`) return their text.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{train_config_pairs, TrainFile};
use super::manifest::RunManifest;
use crate::corpus::{read_documents, read_queries, write_documents, write_queries, Query};
use crate::encoder::{encode_all, train, Checkpoint, TrainLog, TrainingData};
use crate::error::{Error, Result};
use crate::eval::{
    bench_latency, format_bench_table, format_qrels, format_run_lines, mrr_at_k, ndcg_at_k, read_qrels, read_run,
    recall_at_k, BenchReport, Qrels,
};
use crate::index::{build_index, prune_topk, read_vectors, write_vectors, InvertedIndex};
use crate::sparse::SparseVector;
use crate::synth::{generate_corpus, generate_queries, SynthConfig};
use crate::text::{build_vocab, tokenize, vectorize_counts, Vocabulary};

pub const VOCAB_FILE: &str = "vocab.txt";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const TRAIN_LOG_FILE: &str = "train_log.jsonl";
pub const VECTORS_FILE: &str = "vectors.jsonl";
pub const INDEX_FILE: &str = "index.bin";
pub const BENCH_FILE: &str = "bench.json";

pub fn manifest_path(out_dir: &Path, command: &str) -> PathBuf {
    out_dir.join(format!("{command}.manifest.json"))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn tokenized(docs: &[crate::corpus::Document]) -> Vec<Vec<String>> {
    docs.iter().map(|d| tokenize(&d.text)).collect()
}

/// Writes a synthetic corpus with disjoint training and test query sets.
///
/// Files: `corpus.jsonl`, `train_queries.tsv`, `test_queries.tsv` and
/// `test.qrels` (grade 1 for each test query's source document).
pub fn cmd_synth(config: &SynthConfig, train_queries: usize, test_queries: usize, out_dir: &Path) -> Result<()> {
    ensure_dir(out_dir)?;
    let docs = generate_corpus(config)?;
    let train_q = generate_queries(&docs, config, train_queries, "t", config.seed.wrapping_add(1))?;
    let test_q = generate_queries(&docs, config, test_queries, "q", config.seed.wrapping_add(2))?;

    let corpus = out_dir.join("corpus.jsonl");
    let train_path = out_dir.join("train_queries.tsv");
    let test_path = out_dir.join("test_queries.tsv");
    let qrels_path = out_dir.join("test.qrels");
    write_documents(&corpus, &docs)?;
    write_queries(&train_path, &train_q)?;
    write_queries(&test_path, &test_q)?;
    fs::write(&qrels_path, format_qrels(&qrels_for(&test_q))).map_err(|e| Error::io(&qrels_path, e))?;

    let mut m = RunManifest::new("synth");
    m.seed = Some(config.seed);
    m.set("num_docs", config.num_docs)
        .set("word_types", config.word_types)
        .set("zipf_exponent", config.zipf_exponent)
        .set("min_doc_len", config.min_doc_len)
        .set("max_doc_len", config.max_doc_len)
        .set("informative_max_df", config.informative_max_df)
        .set("min_query_terms", config.min_query_terms)
        .set("max_query_terms", config.max_query_terms)
        .set("noise_prob", config.noise_prob)
        .set("noise_source", config.noise_source)
        .set("train_queries", train_queries)
        .set("test_queries", test_queries);
    for p in [&corpus, &train_path, &test_path, &qrels_path] {
        m.output(p)?;
    }
    m.save(&manifest_path(out_dir, "synth"))
}

/// Grade-1 judgments pairing each query with its positive document.
pub fn qrels_for(queries: &[Query]) -> Qrels {
    let mut q = Qrels::default();
    for query in queries {
        q.insert(query.id.clone(), query.positive_doc_id.clone(), 1);
    }
    q
}

pub fn cmd_build_vocab(corpus: &Path, min_df: usize, out_dir: &Path) -> Result<Vocabulary> {
    ensure_dir(out_dir)?;
    let docs = read_documents(corpus)?;
    let vocab = build_vocab(&tokenized(&docs), min_df)?;
    let out = out_dir.join(VOCAB_FILE);
    vocab.save(&out)?;
    let mut m = RunManifest::new("build-vocab");
    m.set("min_df", min_df).input(corpus)?.output(&out)?;
    m.save(&manifest_path(out_dir, "build-vocab"))?;
    Ok(vocab)
}

/// Trains an encoder from a config file; `seed` overrides the file's seed.
///
/// Writes the checkpoint, the JSON-lines training log and, when the config
/// names no vocabulary, the vocabulary built from the corpus.
pub fn cmd_train(config_path: &Path, seed: Option<u64>, out_dir: &Path) -> Result<TrainLog> {
    ensure_dir(out_dir)?;
    let mut file = TrainFile::load(config_path)?;
    if let Some(s) = seed {
        file.train.seed = s;
    }
    let docs = read_documents(&file.corpus)?;
    let queries = read_queries(&file.queries)?;
    let mut m = RunManifest::new("train");
    m.input(config_path)?.input(&file.corpus)?.input(&file.queries)?;
    let vocab = match &file.vocab {
        Some(p) => {
            m.input(p)?;
            Vocabulary::load(p)?
        }
        None => {
            let v = build_vocab(&tokenized(&docs), file.min_df)?;
            let p = out_dir.join(VOCAB_FILE);
            v.save(&p)?;
            m.output(&p)?;
            v
        }
    };
    let data = TrainingData::from_corpus(&docs, &queries, &vocab)?;
    let (params, log) = train(&file.train, &data)?;

    let ckpt = out_dir.join(CHECKPOINT_FILE);
    let log_path = out_dir.join(TRAIN_LOG_FILE);
    Checkpoint {
        vocab_hash: vocab.content_hash(),
        params,
    }
    .save(&ckpt)?;
    log.write_jsonl(&log_path)?;
    m.seed = Some(file.train.seed);
    m.config = train_config_pairs(&file.train);
    m.set("min_df", file.min_df);
    m.output(&ckpt)?.output(&log_path)?;
    m.save(&manifest_path(out_dir, "train"))?;
    Ok(log)
}

/// Encodes every corpus document, optionally keeping only the `prune_k`
/// heaviest terms of each vector.
pub fn cmd_encode(
    checkpoint: &Path,
    vocab_path: &Path,
    corpus: &Path,
    prune_k: Option<usize>,
    out_dir: &Path,
) -> Result<Vec<SparseVector>> {
    ensure_dir(out_dir)?;
    let ckpt = Checkpoint::load(checkpoint)?;
    let vocab = Vocabulary::load(vocab_path)?;
    if ckpt.vocab_hash != vocab.content_hash() {
        return Err(Error::VocabMismatch {
            checkpoint: ckpt.vocab_hash,
            vocab: vocab.content_hash(),
        });
    }
    let docs = read_documents(corpus)?;
    let counts: Vec<SparseVector> = docs
        .iter()
        .map(|d| vectorize_counts(d.id.clone(), &tokenize(&d.text), &vocab))
        .collect();
    let mut vectors = encode_all(&ckpt.params, &counts);
    if let Some(k) = prune_k {
        vectors = vectors.iter().map(|v| prune_topk(v, k)).collect::<Result<_>>()?;
    }
    let out = out_dir.join(VECTORS_FILE);
    write_vectors(&out, &vectors, &vocab)?;
    let mut m = RunManifest::new("encode");
    m.set("prune_k", prune_k.map_or("none".to_owned(), |k| k.to_string()));
    m.input(checkpoint)?.input(vocab_path)?.input(corpus)?.output(&out)?;
    m.save(&manifest_path(out_dir, "encode"))?;
    Ok(vectors)
}

pub fn cmd_index(vectors_path: &Path, vocab_path: &Path, out_dir: &Path) -> Result<InvertedIndex> {
    ensure_dir(out_dir)?;
    let vocab = Vocabulary::load(vocab_path)?;
    let vectors = read_vectors(vectors_path, &vocab)?;
    let index = build_index(&vectors, vocab.len())?;
    let out = out_dir.join(INDEX_FILE);
    index.save(&out)?;
    let mut m = RunManifest::new("index");
    m.input(vectors_path)?.input(vocab_path)?.output(&out)?;
    m.save(&manifest_path(out_dir, "index"))?;
    Ok(index)
}

/// Loads an index and checks it was built over `vocab`.
pub fn load_index(index_path: &Path, vocab: &Vocabulary) -> Result<InvertedIndex> {
    let index = InvertedIndex::load(index_path)?;
    if index.dim() != vocab.len() {
        return Err(Error::InvalidArgument(format!(
            "index dimension {} does not match vocabulary size {}",
            index.dim(),
            vocab.len()
        )));
    }
    Ok(index)
}

/// TREC run lines for `(query_id, text)` pairs. Queries matching no
/// document contribute no lines.
pub fn cmd_search(
    index: &InvertedIndex,
    vocab: &Vocabulary,
    queries: &[(String, String)],
    top_k: usize,
    tag: &str,
) -> Result<String> {
    let mut out = String::new();
    for (id, text) in queries {
        let result = index.search(&vocab.query_terms(text), top_k)?;
        let ranking: Vec<(String, f64)> = result
            .hits
            .iter()
            .map(|h| (index.doc_id(h.doc).to_owned(), h.score))
            .collect();
        out.push_str(&format_run_lines(id, &ranking, tag));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mrr_at_10: f64,
    /// Desk-scale stand-in for Recall@1000.
    pub recall_at_100: f64,
    pub ndcg_at_10: f64,
    pub judged_queries: usize,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MRR@10\t{:.4}", self.mrr_at_10)?;
        writeln!(f, "Recall@100\t{:.4}", self.recall_at_100)?;
        writeln!(f, "nDCG@10\t{:.4}", self.ndcg_at_10)?;
        writeln!(f, "judged_queries\t{}", self.judged_queries)
    }
}

pub fn evaluate(run: &crate::eval::Run, qrels: &Qrels) -> EvalReport {
    EvalReport {
        mrr_at_10: mrr_at_k(run, qrels, 10),
        recall_at_100: recall_at_k(run, qrels, 100),
        ndcg_at_10: ndcg_at_k(run, qrels, 10),
        judged_queries: qrels
            .judgments
            .values()
            .filter(|docs| docs.values().any(|&g| g > 0))
            .count(),
    }
}

pub fn cmd_eval(run_path: &Path, qrels_path: &Path) -> Result<EvalReport> {
    let run = read_run(run_path)?;
    let qrels = read_qrels(qrels_path)?;
    Ok(evaluate(&run, &qrels))
}

/// Benchmarks `queries` against the index; writes the full report,
/// including raw timings, as JSON.
pub fn cmd_bench(
    index_path: &Path,
    vocab_path: &Path,
    queries_path: &Path,
    repeats: usize,
    top_k: usize,
    out_dir: &Path,
) -> Result<BenchReport> {
    ensure_dir(out_dir)?;
    let vocab = Vocabulary::load(vocab_path)?;
    let index = load_index(index_path, &vocab)?;
    let texts: Vec<String> = read_queries(queries_path)?.into_iter().map(|q| q.text).collect();
    let report = bench_latency(&index, &vocab, &texts, repeats, top_k)?;
    let out = out_dir.join(BENCH_FILE);
    let text = serde_json::to_string_pretty(&report)?;
    fs::write(&out, text + "\n").map_err(|e| Error::io(&out, e))?;
    Ok(report)
}

pub fn bench_table(name: &str, report: &BenchReport) -> String {
    format_bench_table(&[(name, report)])
}

/// Top-`top_n` terms by document frequency: `rank term df df_pct` rows.
pub fn cmd_stats(index: &InvertedIndex, vocab: &Vocabulary, top_n: usize) -> String {
    let mut out = String::from("rank\tterm\tdf\tdf_pct\n");
    for (i, e) in index.df_report(top_n).iter().enumerate() {
        let term = vocab.term(e.term).unwrap_or("?");
        out.push_str(&format!("{}\t{term}\t{}\t{:.2}\n", i + 1, e.df, e.df_pct));
    }
    out
}

