//! Training loop: ranking loss plus a λ-scheduled sparsity regularizer, with
//! document-frequency penalties refreshed on a fixed step cadence.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::optim::{Optimizer, OptimizerState};
use super::negatives::{overlap_pool, RawPostings};
use super::params::{encode_all, EncoderParams, Init, ParamGrads};
use super::rank::rank_loss;
use crate::corpus::{Document, Query};
use crate::df::{avg_active_terms, estimate_df, DfTable};
use crate::error::{Error, Result};
use crate::reg::{
    df_flops_loss, flops_loss, lambda_at, penalty_weights, ActivationParams, LambdaSchedule,
    PenaltyWeights,
};
use crate::sparse::{DocBatch, SparseVector, TermId, TermSet};
use crate::text::{tokenize, vectorize_counts, Vocabulary};

/// Which sparsity penalty the trainer applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularizer {
    /// Uniform penalty over terms.
    Flops,
    /// Per-term penalty from DF estimates refreshed during training.
    DfFlops,
    /// Per-term penalty from raw-count DF computed once before training.
    DfFlopsStatic,
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularizer::Flops => "flops",
            Regularizer::DfFlops => "df_flops",
            Regularizer::DfFlopsStatic => "df_flops_static",
        })
    }
}

impl FromStr for Regularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flops" => Ok(Regularizer::Flops),
            "df_flops" => Ok(Regularizer::DfFlops),
            "df_flops_static" => Ok(Regularizer::DfFlopsStatic),
            other => Err(Error::InvalidArgument(format!(
                "unknown regularizer `{other}` (expected flops, df_flops or df_flops_static)"
            ))),
        }
    }
}

/// Maps a DF ratio to a penalty weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyCurve {
    Logistic(ActivationParams),
    /// Every term gets `w_t = 1`.
    Constant,
}

impl PenaltyCurve {
    pub fn weights(&self, df: &DfTable) -> PenaltyWeights {
        match self {
            PenaltyCurve::Logistic(p) => penalty_weights(df, p),
            PenaltyCurve::Constant => PenaltyWeights::ones(df.dim()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Queries per step.
    pub batch_size: usize,
    pub total_steps: usize,
    pub peak_lambda: f64,
    pub warmup_steps: usize,
    pub df_refresh_interval: usize,
    pub df_sample_size: usize,
    pub hard_negatives: usize,
    pub optimizer: Optimizer,
    pub init: Init,
    pub penalty_curve: PenaltyCurve,
    pub regularizer: Regularizer,
    pub epsilon: f64,
    pub rank: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            batch_size: 16,
            total_steps: 1000,
            peak_lambda: 1.0,
            warmup_steps: 600,
            df_refresh_interval: 100,
            df_sample_size: 2048,
            hard_negatives: 7,
            optimizer: Optimizer::Sgd,
            init: Init::Uniform,
            penalty_curve: PenaltyCurve::Logistic(ActivationParams::default()),
            regularizer: Regularizer::DfFlops,
            epsilon: 0.0,
            rank: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be finite and >= 0", self.learning_rate));
        }
        if self.batch_size < 2 {
            return bad(format!("batch_size {} must be >= 2 for in-batch negatives", self.batch_size));
        }
        if self.warmup_steps == 0 || self.warmup_steps > self.total_steps.max(1) {
            return bad(format!(
                "warmup_steps {} must lie in 1..=total_steps ({})",
                self.warmup_steps, self.total_steps
            ));
        }
        if self.df_refresh_interval == 0 {
            return bad("df_refresh_interval must be >= 1".into());
        }
        if self.df_sample_size == 0 {
            return bad("df_sample_size must be >= 1".into());
        }
        if !(self.peak_lambda >= 0.0 && self.peak_lambda.is_finite()) {
            return bad(format!("peak_lambda {} must be finite and >= 0", self.peak_lambda));
        }
        if !(self.epsilon >= 0.0) {
            return bad(format!("epsilon {} must be >= 0", self.epsilon));
        }
        if self.rank == 0 {
            return bad("rank must be >= 1".into());
        }
        Ok(())
    }

    pub fn schedule(&self) -> LambdaSchedule {
        LambdaSchedule {
            peak_lambda: self.peak_lambda,
            warmup_steps: self.warmup_steps,
        }
    }
}

struct TrainingQuery {
    terms: TermSet,
    positive: usize,
    pool: Vec<usize>,
}

/// Raw-count documents and queries prepared for training.
pub struct TrainingData {
    dim: usize,
    docs: Vec<SparseVector>,
    queries: Vec<TrainingQuery>,
}

/// Documents kept as hard-negative candidates per query.
const NEGATIVE_POOL: usize = 32;

impl TrainingData {
    /// `queries` pairs each binary query with the index of its relevant document.
    pub fn new(docs: Vec<SparseVector>, queries: Vec<(TermSet, usize)>, dim: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyInput("training corpus"));
        }
        if queries.is_empty() {
            return Err(Error::EmptyInput("training queries"));
        }
        let postings = RawPostings::build(&docs, dim);
        let mut prepared = Vec::with_capacity(queries.len());
        for (i, (terms, positive)) in queries.into_iter().enumerate() {
            if positive >= docs.len() {
                return Err(Error::MissingPositive(format!("#{i}")));
            }
            if let Some(&t) = terms.iter().find(|&&t| t as usize >= dim) {
                return Err(Error::TermOutOfRange { term: t, dim });
            }
            let pool = overlap_pool(&postings, &docs, &terms, positive, NEGATIVE_POOL);
            prepared.push(TrainingQuery {
                terms,
                positive,
                pool,
            });
        }
        Ok(Self {
            dim,
            docs,
            queries: prepared,
        })
    }

    pub fn from_corpus(docs: &[Document], queries: &[Query], vocab: &Vocabulary) -> Result<Self> {
        let counts: Vec<SparseVector> = docs
            .iter()
            .map(|d| vectorize_counts(d.id.clone(), &tokenize(&d.text), vocab))
            .collect();
        let by_id: HashMap<&str, usize> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.as_str(), i))
            .collect();
        let mut pairs = Vec::with_capacity(queries.len());
        for q in queries {
            let pos = *by_id
                .get(q.positive_doc_id.as_str())
                .ok_or_else(|| Error::MissingPositive(q.id.clone()))?;
            pairs.push((vocab.query_terms(&q.text), pos));
        }
        Self::new(counts, pairs, vocab.len())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn docs(&self) -> &[SparseVector] {
        &self.docs
    }

    pub fn num_queries(&self) -> usize {
        self.queries.len()
    }

    /// Draws `batch_size` queries with distinct positives and up to
    /// `hard_negatives` negatives each from their overlap pools.
    pub fn sample_batch<R: Rng>(&self, batch_size: usize, hard_negatives: usize, rng: &mut R) -> TrainBatch {
        let mut chosen: Vec<usize> = Vec::with_capacity(batch_size);
        let mut used_docs = std::collections::HashSet::new();
        let mut attempts = 0;
        while chosen.len() < batch_size && attempts < 50 * batch_size {
            attempts += 1;
            let qi = rng.random_range(0..self.queries.len());
            if chosen.contains(&qi) {
                continue;
            }
            if used_docs.insert(self.docs[self.queries[qi].positive].doc_id()) {
                chosen.push(qi);
            }
        }
        let mut docs = Vec::new();
        let mut queries = Vec::with_capacity(chosen.len());
        let mut positives = Vec::with_capacity(chosen.len());
        for &qi in &chosen {
            let q = &self.queries[qi];
            positives.push(docs.len());
            docs.push(self.docs[q.positive].clone());
            queries.push(q.terms.clone());
        }
        let mut hard = Vec::with_capacity(chosen.len());
        for &qi in &chosen {
            let pool = &self.queries[qi].pool;
            let n = hard_negatives.min(pool.len());
            let mut idx = Vec::with_capacity(n);
            for j in index::sample(rng, pool.len(), n) {
                idx.push(docs.len());
                docs.push(self.docs[pool[j]].clone());
            }
            hard.push(idx);
        }
        TrainBatch {
            docs,
            queries,
            positives,
            hard_negatives: hard,
        }
    }
}

/// Raw-count documents and queries for one optimization step.
#[derive(Debug, Clone)]
pub struct TrainBatch {
    pub docs: Vec<SparseVector>,
    pub queries: Vec<TermSet>,
    /// Index into `docs` of each query's positive.
    pub positives: Vec<usize>,
    /// Indices into `docs` of each query's hard negatives.
    pub hard_negatives: Vec<Vec<usize>>,
}

/// Regularizer applied during a step.
#[derive(Debug, Clone, Copy)]
pub enum Penalty<'a> {
    Flops,
    DfFlops(&'a PenaltyWeights),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub rank_loss: f64,
    pub reg_loss: f64,
    pub lambda: f64,
    pub total_loss: f64,
}

/// Objective value and its gradient with respect to every encoder parameter.
#[derive(Debug, Clone)]
pub struct Objective {
    pub rank_loss: f64,
    pub reg_loss: f64,
    pub total_loss: f64,
    pub grads: ParamGrads,
}

/// `rank_loss + λ · reg_loss` on `batch` and its exact parameter gradient.
pub fn objective(
    params: &EncoderParams,
    batch: &TrainBatch,
    lambda: f64,
    penalty: Penalty<'_>,
) -> Result<Objective> {
    let dim = params.dim();
    let fwd = params.forward_batch(&batch.docs);
    let encoded: Vec<SparseVector> = batch
        .docs
        .iter()
        .enumerate()
        .map(|(i, d)| fwd.to_sparse(i, d.doc_id()))
        .collect();

    let ranked = rank_loss(&batch.queries, &encoded, &batch.positives, &batch.hard_negatives)?;
    let doc_batch = DocBatch::new(encoded, dim)?;
    let reg = match penalty {
        Penalty::Flops => flops_loss(&doc_batch),
        Penalty::DfFlops(w) => df_flops_loss(&doc_batch, w)?,
    };

    let mut shared = vec![0.0; dim];
    if lambda != 0.0 {
        for &(t, g) in &reg.term_grads {
            shared[t as usize] = lambda * g;
        }
    }
    let mut dl_dr = Vec::with_capacity(batch.docs.len() * dim);
    for rank_grads in &ranked.doc_grads {
        let row = dl_dr.len();
        dl_dr.extend_from_slice(&shared);
        for &(t, g) in rank_grads {
            dl_dr[row + t as usize] += g;
        }
    }
    let mut grads = ParamGrads::zeros_like(params);
    grads.accumulate(params, &batch.docs, &fwd, dl_dr);
    Ok(Objective {
        rank_loss: ranked.loss,
        reg_loss: reg.loss,
        total_loss: ranked.loss + lambda * reg.loss,
        grads,
    })
}

/// One optimizer step on `rank_loss + λ · reg_loss`.
pub fn train_step(
    params: &mut EncoderParams,
    optimizer: &mut OptimizerState,
    batch: &TrainBatch,
    lambda: f64,
    penalty: Penalty<'_>,
    learning_rate: f64,
    step: usize,
) -> Result<StepRecord> {
    let obj = objective(params, batch, lambda, penalty)?;
    if !obj.total_loss.is_finite() {
        return Err(Error::NonFiniteLoss {
            step,
            rank_loss: obj.rank_loss,
            reg_loss: obj.reg_loss,
            lambda,
        });
    }
    optimizer.step(params, &obj.grads, learning_rate);
    Ok(StepRecord {
        step,
        rank_loss: obj.rank_loss,
        reg_loss: obj.reg_loss,
        lambda,
        total_loss: obj.total_loss,
    })
}

/// Penalties plus the DF table they were derived from.
#[derive(Debug, Clone)]
pub struct Refresh {
    pub weights: PenaltyWeights,
    pub df: DfTable,
    pub avg_active_terms: f64,
}

/// Re-estimates DF by encoding `validation` with the current parameters.
///
/// At step 0 the weights are all ones regardless of the DF estimate.
pub fn refresh_penalties(
    params: &EncoderParams,
    step: usize,
    validation: &[SparseVector],
    curve: &PenaltyCurve,
    epsilon: f64,
) -> Result<Refresh> {
    if validation.is_empty() {
        return Err(Error::EmptyInput("DF validation sample"));
    }
    let encoded = encode_all(params, validation);
    let df = estimate_df(&encoded, epsilon, params.dim())?;
    let weights = if step == 0 {
        PenaltyWeights::ones(params.dim())
    } else {
        curve.weights(&df)
    };
    Ok(Refresh {
        weights,
        avg_active_terms: avg_active_terms(&encoded)?,
        df,
    })
}

/// Summary of one DF estimate taken during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfSnapshot {
    pub step: usize,
    pub sample_size: usize,
    pub top1_df_pct: f64,
    pub avg_active_terms: f64,
    pub mean_penalty: f64,
    /// Ten most frequent terms as `(term id, DF)`.
    pub top_terms: Vec<(TermId, u32)>,
}

impl DfSnapshot {
    fn new(step: usize, df: &DfTable, avg_active_terms: f64, weights: &PenaltyWeights) -> Self {
        let top_terms = df.top_terms(10);
        let top1 = top_terms.first().map_or(0, |&(_, d)| d);
        let mean_penalty = if weights.is_empty() {
            0.0
        } else {
            weights.values().iter().sum::<f64>() / weights.len() as f64
        };
        Self {
            step,
            sample_size: df.sample_size(),
            top1_df_pct: 100.0 * top1 as f64 / df.sample_size() as f64,
            avg_active_terms,
            mean_penalty,
            top_terms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogEntry {
    Step(StepRecord),
    DfSnapshot(DfSnapshot),
}

/// Everything the training loop observed, in execution order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<DfSnapshot>,
}

impl TrainLog {
    /// Entries ordered by step, snapshots before the step they precede.
    pub fn entries(&self) -> Vec<LogEntry> {
        let mut out = Vec::with_capacity(self.steps.len() + self.snapshots.len());
        let mut snaps = self.snapshots.iter().peekable();
        for rec in &self.steps {
            while let Some(s) = snaps.next_if(|s| s.step <= rec.step) {
                out.push(LogEntry::DfSnapshot(s.clone()));
            }
            out.push(LogEntry::Step(*rec));
        }
        out.extend(snaps.cloned().map(LogEntry::DfSnapshot));
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        for entry in self.entries() {
            serde_json::to_writer(&mut w, &entry)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn final_snapshot(&self) -> Option<&DfSnapshot> {
        self.snapshots.last()
    }
}

/// Trains an encoder from scratch.
///
/// DF is estimated on a fixed random sample of `df_sample_size` documents
/// every `df_refresh_interval` steps in all modes, so the log carries DF
/// snapshots for every regularizer. Only `DfFlops` feeds them back into the
/// penalty. A final snapshot is taken after the last step.
pub fn train(config: &TrainConfig, data: &TrainingData) -> Result<(EncoderParams, TrainLog)> {
    config.validate()?;
    let dim = data.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = EncoderParams::init_with(dim, config.rank, config.init, &mut rng)?;
    let mut optimizer = OptimizerState::new(config.optimizer, &params);
    let mut log = TrainLog::default();
    if config.total_steps == 0 {
        return Ok((params, log));
    }

    let n_docs = data.docs().len();
    let mut sample: Vec<usize> = index::sample(&mut rng, n_docs, config.df_sample_size.min(n_docs)).into_vec();
    sample.sort_unstable();
    let validation: Vec<SparseVector> = sample.iter().map(|&i| data.docs()[i].clone()).collect();

    let mut weights = match config.regularizer {
        Regularizer::DfFlopsStatic => {
            let raw_df = estimate_df(data.docs(), config.epsilon, dim)?;
            config.penalty_curve.weights(&raw_df)
        }
        _ => PenaltyWeights::ones(dim),
    };

    let schedule = config.schedule();
    for step in 0..config.total_steps {
        if step % config.df_refresh_interval == 0 {
            let refresh = refresh_penalties(
                &params,
                step,
                &validation,
                &config.penalty_curve,
                config.epsilon,
            )?;
            if config.regularizer == Regularizer::DfFlops {
                weights = refresh.weights;
            }
            log.snapshots.push(DfSnapshot::new(step, &refresh.df, refresh.avg_active_terms, &weights));
        }
        let lambda = lambda_at(step, &schedule);
        let batch = data.sample_batch(config.batch_size, config.hard_negatives, &mut rng);
        let penalty = match config.regularizer {
            Regularizer::Flops => Penalty::Flops,
            Regularizer::DfFlops | Regularizer::DfFlopsStatic => Penalty::DfFlops(&weights),
        };
        let record = train_step(&mut params, &mut optimizer, &batch, lambda, penalty, config.learning_rate, step)?;
        log.steps.push(record);
    }

    let encoded = encode_all(&params, &validation);
    let df = estimate_df(&encoded, config.epsilon, dim)?;
    log.snapshots.push(DfSnapshot::new(
        config.total_steps,
        &df,
        avg_active_terms(&encoded)?,
        &weights,
    ));
    Ok((params, log))
}
