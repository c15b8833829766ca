//! Regime comparison on a synthetic corpus.
//!
//! Each regime names a regularizer, a grid of peak λ values and optional
//! post-hoc pruning. For every seed, each distinct (regularizer, λ) model is
//! trained once, then every regime picks one λ from its grid:
//!
//! - FLOPS regimes keep the λ with the best dev-set MRR@10 (earlier grid
//!   entries win ties).
//! - Other regimes, when `quality_tolerance` is set, keep the largest λ whose
//!   dev MRR@10 is within that relative tolerance of the best FLOPS model,
//!   i.e. the sparsest model of comparable quality. Without a qualifying λ,
//!   or without any FLOPS model, they fall back to the best dev MRR@10.
//!
//! The chosen model is indexed, evaluated on the test queries and
//! benchmarked. Pruning is applied after selection, so a pruned regime
//! reuses its unpruned counterpart's model.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::commands::evaluate;
use super::config::{apply_train_key, finish_train, parse_entries, train_config_pairs, value, CurveKeys};
use super::manifest::RunManifest;
use crate::corpus::Query;
use crate::encoder::{encode_all, train, Init, Optimizer, Regularizer, TrainConfig, TrainingData};
use crate::error::{Error, Result};
use crate::eval::{bench_latency, Run};
use crate::index::{build_index, prune_topk, InvertedIndex};
use crate::sparse::SparseVector;
use crate::synth::{generate_corpus, generate_queries, SynthConfig};
use crate::text::{build_vocab, tokenize, Vocabulary};

/// Retrieval depth of evaluation runs; Recall@100 needs 100 hits.
const EVAL_DEPTH: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub name: String,
    pub regularizer: Regularizer,
    pub lambdas: Vec<f64>,
    pub prune_k: Option<usize>,
}

impl RegimeSpec {
    pub fn new(name: &str, regularizer: Regularizer, lambdas: &[f64], prune_k: Option<usize>) -> Self {
        Self {
            name: name.to_owned(),
            regularizer,
            lambdas: lambdas.to_vec(),
            prune_k,
        }
    }
}

/// `NAME REGULARIZER λ[,λ...] [prune=K]`, e.g. `flops+prune flops 0.001,0.1 prune=150`.
impl FromStr for RegimeSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let (name, reg, lambdas, rest) = match parts[..] {
            [n, r, l, ref rest @ ..] => (n, r, l, rest),
            _ => return Err(format!("expected `NAME REGULARIZER LAMBDAS [prune=K]`, got `{s}`")),
        };
        let regularizer: Regularizer = reg.parse().map_err(|e: Error| e.to_string())?;
        let lambdas = lambdas
            .split(',')
            .map(|l| l.trim().parse::<f64>().map_err(|e| format!("lambda `{l}`: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err("lambdas must be finite and >= 0".into());
        }
        let prune_k = match rest {
            [] => None,
            [p] => {
                let k = p
                    .strip_prefix("prune=")
                    .ok_or_else(|| format!("unexpected `{p}`"))?;
                Some(k.parse::<usize>().map_err(|e| format!("prune `{k}`: {e}"))?)
            }
            _ => return Err(format!("trailing fields in `{s}`")),
        };
        Ok(Self::new(name, regularizer, &lambdas, prune_k))
    }
}

impl std::fmt::Display for RegimeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let lambdas: Vec<String> = self.lambdas.iter().map(f64::to_string).collect();
        write!(f, "{} {} {}", self.name, self.regularizer, lambdas.join(","))?;
        if let Some(k) = self.prune_k {
            write!(f, " prune={k}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub synth: SynthConfig,
    pub train_queries: usize,
    pub dev_queries: usize,
    pub test_queries: usize,
    pub min_df: usize,
    pub seeds: Vec<u64>,
    /// Shared hyperparameters; regularizer, peak λ and seed are set per model.
    pub train: TrainConfig,
    pub regimes: Vec<RegimeSpec>,
    pub repeats: usize,
    pub top_k: usize,
    /// Length of the DF-by-rank series.
    pub df_curve_terms: usize,
    /// Relative dev-MRR slack for comparable-quality selection; `None`
    /// selects every regime by best dev MRR.
    pub quality_tolerance: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let flops_sweep = [1e-3, 1e-1, 1.0];
        let df_grid = [0.3, 1.0, 3.0];
        Self {
            synth: SynthConfig::default(),
            train_queries: 20_000,
            dev_queries: 300,
            test_queries: 500,
            min_df: 2,
            seeds: vec![0, 1, 2],
            train: TrainConfig {
                optimizer: Optimizer::Adam,
                init: Init::Tied,
                learning_rate: 0.003,
                batch_size: 64,
                hard_negatives: 1,
                total_steps: 2000,
                warmup_steps: 1200,
                df_refresh_interval: 10,
                df_sample_size: 1024,
                ..TrainConfig::default()
            },
            regimes: vec![
                RegimeSpec::new("flops", Regularizer::Flops, &flops_sweep, None),
                RegimeSpec::new("flops+prune150", Regularizer::Flops, &flops_sweep, Some(150)),
                RegimeSpec::new("flops@1e-3", Regularizer::Flops, &[1e-3], None),
                RegimeSpec::new("flops@1e-1", Regularizer::Flops, &[1e-1], None),
                RegimeSpec::new("flops@1", Regularizer::Flops, &[1.0], None),
                RegimeSpec::new("df_flops", Regularizer::DfFlops, &df_grid, None),
                RegimeSpec::new("df_flops+prune150", Regularizer::DfFlops, &df_grid, Some(150)),
            ],
            repeats: 3,
            top_k: 10,
            df_curve_terms: 200,
            quality_tolerance: Some(0.10),
        }
    }
}

impl ExperimentConfig {
    /// Parses an experiment file. Unset keys keep their defaults; the first
    /// `regime` line replaces the default regime list.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut curve = CurveKeys::default();
        let mut warmup = None;
        let mut regimes = Vec::new();
        for e in parse_entries(text, path)? {
            let s = &mut cfg.synth;
            match e.key.as_str() {
                "num_docs" => s.num_docs = value(&e, path)?,
                "word_types" => s.word_types = value(&e, path)?,
                "zipf_exponent" => s.zipf_exponent = value(&e, path)?,
                "min_doc_len" => s.min_doc_len = value(&e, path)?,
                "max_doc_len" => s.max_doc_len = value(&e, path)?,
                "informative_max_df" => s.informative_max_df = value(&e, path)?,
                "min_query_terms" => s.min_query_terms = value(&e, path)?,
                "max_query_terms" => s.max_query_terms = value(&e, path)?,
                "noise_prob" => s.noise_prob = value(&e, path)?,
                "noise_source" => s.noise_source = value(&e, path)?,
                "corpus_seed" => s.seed = value(&e, path)?,
                "train_queries" => cfg.train_queries = value(&e, path)?,
                "dev_queries" => cfg.dev_queries = value(&e, path)?,
                "test_queries" => cfg.test_queries = value(&e, path)?,
                "min_df" => cfg.min_df = value(&e, path)?,
                "repeats" => cfg.repeats = value(&e, path)?,
                "top_k" => cfg.top_k = value(&e, path)?,
                "df_curve_terms" => cfg.df_curve_terms = value(&e, path)?,
                "quality_tolerance" => {
                    cfg.quality_tolerance = match e.value.as_str() {
                        "none" => None,
                        _ => Some(value(&e, path)?),
                    }
                }
                "regime" => regimes.push(value::<RegimeSpec>(&e, path)?),
                "seeds" => {
                    cfg.seeds = e
                        .value
                        .split(',')
                        .map(|x| x.trim().parse::<u64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|err| Error::parse(path, e.line, format!("seeds: {err}")))?;
                }
                _ => {
                    if !apply_train_key(&mut cfg.train, &mut curve, &mut warmup, &e, path)? {
                        return Err(Error::UnknownConfigKey(e.key));
                    }
                }
            }
        }
        if !regimes.is_empty() {
            cfg.regimes = regimes;
        }
        finish_train(&mut cfg.train, curve, warmup)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.train.validate()?;
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_owned()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.regimes.is_empty() || self.regimes.iter().any(|r| r.lambdas.is_empty()) {
            return bad("every regime needs at least one lambda");
        }
        let mut names: Vec<&str> = self.regimes.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("regime names must be unique");
        }
        if self.train_queries == 0 || self.dev_queries == 0 || self.test_queries == 0 {
            return bad("query counts must be >= 1");
        }
        if self.repeats == 0 || self.top_k == 0 {
            return bad("repeats and top_k must be >= 1");
        }
        if let Some(t) = self.quality_tolerance {
            if !(0.0..1.0).contains(&t) {
                return bad("quality_tolerance must be in [0, 1)");
            }
        }
        Ok(())
    }

    /// Flat settings snapshot for manifests.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = train_config_pairs(&self.train);
        m.remove("peak_lambda");
        m.remove("regularizer");
        m.remove("seed");
        let s = &self.synth;
        let mut put = |k: &str, v: String| {
            m.insert(k.to_owned(), v);
        };
        put("num_docs", s.num_docs.to_string());
        put("word_types", s.word_types.to_string());
        put("zipf_exponent", s.zipf_exponent.to_string());
        put("min_doc_len", s.min_doc_len.to_string());
        put("max_doc_len", s.max_doc_len.to_string());
        put("informative_max_df", s.informative_max_df.to_string());
        put("min_query_terms", s.min_query_terms.to_string());
        put("max_query_terms", s.max_query_terms.to_string());
        put("noise_prob", s.noise_prob.to_string());
        put("noise_source", s.noise_source.to_string());
        put("corpus_seed", s.seed.to_string());
        put("train_queries", self.train_queries.to_string());
        put("dev_queries", self.dev_queries.to_string());
        put("test_queries", self.test_queries.to_string());
        put("min_df", self.min_df.to_string());
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        put("seeds", seeds.join(","));
        put("repeats", self.repeats.to_string());
        put("top_k", self.top_k.to_string());
        put("df_curve_terms", self.df_curve_terms.to_string());
        let tol = self.quality_tolerance.map_or_else(|| "none".to_owned(), |t| t.to_string());
        put("quality_tolerance", tol);
        for (i, r) in self.regimes.iter().enumerate() {
            put(&format!("regime.{i}"), r.to_string());
        }
        m
    }

    /// Config-file text that [`ExperimentConfig::parse`] reads back to `self`.
    pub fn to_config_text(&self) -> String {
        let mut text = String::new();
        for (k, v) in self.to_pairs() {
            let key = if k.starts_with("regime.") { "regime" } else { k.as_str() };
            text.push_str(&format!("{key} = {v}\n"));
        }
        text
    }
}

/// One regime's measurements. In a mean row, every number is averaged
/// over seeds and `lambdas` lists the selected λ of each seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub regime: String,
    pub regularizer: Regularizer,
    pub lambdas: Vec<f64>,
    pub prune_k: Option<usize>,
    pub dev_mrr_at_10: f64,
    pub mrr_at_10: f64,
    pub recall_at_100: f64,
    pub latency_avg_ms: f64,
    pub latency_p99_ms: f64,
    pub matches_avg: f64,
    pub top1_df_pct: f64,
    pub avg_emb_length: f64,
    /// Wall time spent training the selected model.
    pub train_seconds: f64,
    /// DF% of the most frequent terms, highest first.
    pub df_curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub rows: Vec<RegimeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub per_seed: Vec<SeedReport>,
    pub mean: Vec<RegimeRow>,
}

fn mean_rows(per_seed: &[SeedReport]) -> Vec<RegimeRow> {
    let n = per_seed.len() as f64;
    let first = &per_seed[0].rows;
    (0..first.len())
        .map(|i| {
            let rows: Vec<&RegimeRow> = per_seed.iter().map(|s| &s.rows[i]).collect();
            let avg = |f: fn(&RegimeRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
            let curve_len = rows.iter().map(|r| r.df_curve.len()).min().unwrap_or(0);
            RegimeRow {
                regime: first[i].regime.clone(),
                regularizer: first[i].regularizer,
                lambdas: rows.iter().flat_map(|r| r.lambdas.iter().copied()).collect(),
                prune_k: first[i].prune_k,
                dev_mrr_at_10: avg(|r| r.dev_mrr_at_10),
                mrr_at_10: avg(|r| r.mrr_at_10),
                recall_at_100: avg(|r| r.recall_at_100),
                latency_avg_ms: avg(|r| r.latency_avg_ms),
                latency_p99_ms: avg(|r| r.latency_p99_ms),
                matches_avg: avg(|r| r.matches_avg),
                top1_df_pct: avg(|r| r.top1_df_pct),
                avg_emb_length: avg(|r| r.avg_emb_length),
                train_seconds: avg(|r| r.train_seconds),
                df_curve: (0..curve_len)
                    .map(|k| rows.iter().map(|r| r.df_curve[k]).sum::<f64>() / n)
                    .collect(),
            }
        })
        .collect()
}

pub fn format_rows(rows: &[RegimeRow]) -> String {
    let name_w = rows.iter().map(|r| r.regime.len()).max().unwrap_or(0).max(6);
    let lambda = |r: &RegimeRow| {
        let v: Vec<String> = r.lambdas.iter().map(|l| format!("{l}")).collect();
        v.join("/")
    };
    let lam_w = rows.iter().map(|r| lambda(r).len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    writeln!(
        out,
        "{:<name_w$}  {:<lam_w$}  {:>7}  {:>10}  {:>12}  {:>12}  {:>11}  {:>9}  {:>12}",
        "regime", "lambda", "MRR@10", "Recall@100", "Lat avg (ms)", "Lat p99 (ms)", "Matches avg", "Top@1 DF", "Avg emb len"
    )
    .unwrap();
    for r in rows {
        writeln!(
            out,
            "{:<name_w$}  {:<lam_w$}  {:>7.4}  {:>10.4}  {:>12.4}  {:>12.4}  {:>11.1}  {:>8.1}%  {:>12.1}",
            r.regime,
            lambda(r),
            r.mrr_at_10,
            r.recall_at_100,
            r.latency_avg_ms,
            r.latency_p99_ms,
            r.matches_avg,
            r.top1_df_pct,
            r.avg_emb_length
        )
        .unwrap();
    }
    out
}

impl CompareReport {
    pub fn row(&self, regime: &str) -> Option<&RegimeRow> {
        self.mean.iter().find(|r| r.regime == regime)
    }

    pub fn seed_row(&self, seed_index: usize, regime: &str) -> Option<&RegimeRow> {
        self.per_seed.get(seed_index)?.rows.iter().find(|r| r.regime == regime)
    }

    /// Mean table followed by one table per seed.
    pub fn table(&self) -> String {
        let mut out = format!("mean over {} seed(s)\n", self.per_seed.len());
        out.push_str(&format_rows(&self.mean));
        for s in &self.per_seed {
            out.push_str(&format!("\nseed {}\n", s.seed));
            out.push_str(&format_rows(&s.rows));
        }
        out
    }

    /// `rank,<regime>,...` rows of seed-averaged DF% by term rank.
    pub fn df_csv(&self) -> String {
        let mut out = String::from("rank");
        for r in &self.mean {
            out.push(',');
            out.push_str(&r.regime);
        }
        out.push('\n');
        let len = self.mean.iter().map(|r| r.df_curve.len()).max().unwrap_or(0);
        for k in 0..len {
            out.push_str(&(k + 1).to_string());
            for r in &self.mean {
                out.push(',');
                if let Some(v) = r.df_curve.get(k) {
                    out.push_str(&format!("{v:.4}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

struct Prepared {
    vocab: Vocabulary,
    counts: Vec<SparseVector>,
    data: TrainingData,
    dev: Vec<Query>,
    test: Vec<Query>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let docs = generate_corpus(&cfg.synth)?;
    let seed = cfg.synth.seed;
    let train_q = generate_queries(&docs, &cfg.synth, cfg.train_queries, "t", seed.wrapping_add(1))?;
    let test = generate_queries(&docs, &cfg.synth, cfg.test_queries, "q", seed.wrapping_add(2))?;
    let dev = generate_queries(&docs, &cfg.synth, cfg.dev_queries, "v", seed.wrapping_add(3))?;
    let tokens: Vec<Vec<String>> = docs.iter().map(|d| tokenize(&d.text)).collect();
    let vocab = build_vocab(&tokens, cfg.min_df)?;
    let data = TrainingData::from_corpus(&docs, &train_q, &vocab)?;
    let counts = data.docs().to_vec();
    Ok(Prepared {
        vocab,
        counts,
        data,
        dev,
        test,
    })
}

fn run_queries(index: &InvertedIndex, vocab: &Vocabulary, queries: &[Query]) -> Result<Run> {
    let mut run = Run::default();
    for q in queries {
        let res = index.search(&vocab.query_terms(&q.text), EVAL_DEPTH)?;
        let ranking = res
            .hits
            .iter()
            .map(|h| (index.doc_id(h.doc).to_owned(), h.score))
            .collect();
        run.insert(q.id.clone(), ranking);
    }
    Ok(run)
}

struct Model {
    vectors: Vec<SparseVector>,
    index: InvertedIndex,
    dev_mrr: f64,
    train_seconds: f64,
}

fn model_key(reg: Regularizer, lambda: f64) -> (String, u64) {
    (reg.to_string(), lambda.to_bits())
}

/// Best dev MRR (first wins ties); with a `floor`, the largest λ whose dev
/// MRR reaches it, falling back to the best when none does.
fn select_lambda(lambdas: &[f64], dev: impl Fn(f64) -> f64, floor: Option<f64>) -> f64 {
    let mut best = lambdas[0];
    for &l in &lambdas[1..] {
        if dev(l) > dev(best) {
            best = l;
        }
    }
    let Some(floor) = floor else { return best };
    lambdas
        .iter()
        .copied()
        .filter(|&l| dev(l) >= floor)
        .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.max(l))))
        .unwrap_or(best)
}

/// Runs every regime for every seed. `progress` receives one line per
/// finished stage.
pub fn run_experiment(cfg: &ExperimentConfig, progress: &mut dyn FnMut(&str)) -> Result<CompareReport> {
    cfg.validate()?;
    let prep = prepare(cfg).map_err(|e| e.in_stage("synth"))?;
    let dev_qrels = super::commands::qrels_for(&prep.dev);
    let test_qrels = super::commands::qrels_for(&prep.test);
    let test_texts: Vec<String> = prep.test.iter().map(|q| q.text.clone()).collect();
    progress(&format!(
        "corpus: {} docs, |V| = {}, {} train / {} dev / {} test queries",
        prep.counts.len(),
        prep.vocab.len(),
        cfg.train_queries,
        prep.dev.len(),
        prep.test.len()
    ));

    let mut per_seed = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let mut models: BTreeMap<(String, u64), Model> = BTreeMap::new();
        let mut rows = Vec::with_capacity(cfg.regimes.len());
        for regime in &cfg.regimes {
            for &lambda in &regime.lambdas {
                let key = model_key(regime.regularizer, lambda);
                if models.contains_key(&key) {
                    continue;
                }
                let stage = format!("train {} lambda={lambda} seed={seed}", regime.regularizer);
                let started = Instant::now();
                let config = TrainConfig {
                    regularizer: regime.regularizer,
                    peak_lambda: lambda,
                    seed,
                    ..cfg.train.clone()
                };
                let (params, _) = train(&config, &prep.data).map_err(|e| e.in_stage(&stage))?;
                let vectors = encode_all(&params, &prep.counts);
                let index = build_index(&vectors, prep.vocab.len()).map_err(|e| e.in_stage(&stage))?;
                let dev_run = run_queries(&index, &prep.vocab, &prep.dev)?;
                let dev_mrr = evaluate(&dev_run, &dev_qrels).mrr_at_10;
                let train_seconds = started.elapsed().as_secs_f64();
                progress(&format!(
                    "{stage}: {train_seconds:.1}s, dev MRR@10 {dev_mrr:.4}, avg length {:.1}",
                    index.avg_doc_length()
                ));
                models.insert(
                    key,
                    Model {
                        vectors,
                        index,
                        dev_mrr,
                        train_seconds,
                    },
                );
            }
        }
        let flops_reference = models
            .iter()
            .filter(|((reg, _), _)| *reg == Regularizer::Flops.to_string())
            .map(|(_, m)| m.dev_mrr)
            .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |a| a.max(m))));

        for regime in &cfg.regimes {
            let dev = |l: f64| models[&model_key(regime.regularizer, l)].dev_mrr;
            let floor = match (regime.regularizer, cfg.quality_tolerance, flops_reference) {
                (Regularizer::Flops, _, _) | (_, None, _) | (_, _, None) => None,
                (_, Some(tol), Some(best)) => Some(best * (1.0 - tol)),
            };
            let best = select_lambda(&regime.lambdas, dev, floor);
            let model = &models[&model_key(regime.regularizer, best)];
            let stage = format!("evaluate {} seed={seed}", regime.name);
            let pruned;
            let index = match regime.prune_k {
                None => &model.index,
                Some(k) => {
                    let vectors = model
                        .vectors
                        .iter()
                        .map(|v| prune_topk(v, k))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| e.in_stage(&stage))?;
                    pruned = build_index(&vectors, prep.vocab.len()).map_err(|e| e.in_stage(&stage))?;
                    &pruned
                }
            };
            let test_run = run_queries(index, &prep.vocab, &prep.test).map_err(|e| e.in_stage(&stage))?;
            let quality = evaluate(&test_run, &test_qrels);
            let bench = bench_latency(index, &prep.vocab, &test_texts, cfg.repeats, cfg.top_k)
                .map_err(|e| e.in_stage(&stage))?;
            let row = RegimeRow {
                regime: regime.name.clone(),
                regularizer: regime.regularizer,
                lambdas: vec![best],
                prune_k: regime.prune_k,
                dev_mrr_at_10: model.dev_mrr,
                mrr_at_10: quality.mrr_at_10,
                recall_at_100: quality.recall_at_100,
                latency_avg_ms: bench.latency_avg_ms,
                latency_p99_ms: bench.latency_p99_ms,
                matches_avg: bench.matches_avg,
                top1_df_pct: bench.top1_df_pct,
                avg_emb_length: bench.avg_emb_length,
                train_seconds: model.train_seconds,
                df_curve: index.df_report(cfg.df_curve_terms).iter().map(|e| e.df_pct).collect(),
            };
            progress(&format!(
                "{stage}: lambda={best} MRR@10 {:.4} matches {:.1} top1 DF {:.1}%",
                row.mrr_at_10, row.matches_avg, row.top1_df_pct
            ));
            rows.push(row);
        }
        per_seed.push(SeedReport { seed, rows });
    }
    let mean = mean_rows(&per_seed);
    Ok(CompareReport { per_seed, mean })
}

pub const COMPARE_TABLE_FILE: &str = "compare.txt";
pub const COMPARE_JSON_FILE: &str = "compare.json";
pub const DF_CSV_FILE: &str = "df_by_rank.csv";

/// Runs the experiment in `config_path` and writes the table, the full JSON
/// report and the DF-by-rank CSV. `seed` replaces the seed list.
pub fn cmd_compare(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: &Path,
    progress: &mut dyn FnMut(&str),
) -> Result<CompareReport> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    let report = run_experiment(&cfg, progress)?;
    let table = out_dir.join(COMPARE_TABLE_FILE);
    let json = out_dir.join(COMPARE_JSON_FILE);
    let csv = out_dir.join(DF_CSV_FILE);
    fs::write(&table, report.table()).map_err(|e| Error::io(&table, e))?;
    fs::write(&json, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&json, e))?;
    fs::write(&csv, report.df_csv()).map_err(|e| Error::io(&csv, e))?;
    let mut m = RunManifest::new("compare");
    m.config = cfg.to_pairs();
    m.input(config_path)?;
    // the table and JSON carry timings, so only the CSV is reproducible
    m.output(&csv)?;
    m.save(&super::commands::manifest_path(out_dir, "compare"))?;
    Ok(report)
}
