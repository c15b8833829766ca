//! Central finite-difference checks of every analytic gradient, shared by
//! the unit-style gradient tests and the acceptance run.

use dfflops::encoder::{objective, rank_loss, EncoderParams, Penalty, TrainingData};
use dfflops::reg::{df_flops_loss, flops_loss, PenaltyWeights};
use dfflops::sparse::{DocBatch, SparseVector, TermId, TermSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INSTANCES: usize = 50;
pub const TOLERANCE: f64 = 1e-4;
const H: f64 = 1e-6;

/// ‖a − n‖ / max(‖a‖, ‖n‖), with a floor so all-zero gradients compare equal.
fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, n)| a - n).collect();
    norm(&diff) / norm(analytic).max(norm(numeric)).max(1e-12)
}

/// Dense docs with every weight in [0.1, 2] so ±H keeps them positive.
fn random_docs(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(0.1..2.0)).collect())
        .collect()
}

fn to_sparse(docs: &[Vec<f64>]) -> Vec<SparseVector> {
    docs.iter()
        .enumerate()
        .map(|(i, w)| {
            let entries = w.iter().enumerate().map(|(t, &x)| (t as TermId, x));
            SparseVector::from_entries(format!("d{i}"), entries, w.len()).unwrap()
        })
        .collect()
}

/// Central differences of `f` over every (doc, term) weight.
fn numeric_doc_grads(docs: &[Vec<f64>], f: impl Fn(&[SparseVector]) -> f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; docs[0].len()]; docs.len()];
    for d in 0..docs.len() {
        for t in 0..docs[0].len() {
            let mut plus = docs.to_vec();
            plus[d][t] += H;
            let mut minus = docs.to_vec();
            minus[d][t] -= H;
            out[d][t] = (f(&to_sparse(&plus)) - f(&to_sparse(&minus))) / (2.0 * H);
        }
    }
    out
}

/// Relative errors of the FLOPS gradient, one per instance.
pub fn flops_errors() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut errors = Vec::new();
    for _ in 0..INSTANCES {
        let (n, dim) = (rng.random_range(2..6), rng.random_range(3..9));
        let docs = random_docs(&mut rng, n, dim);
        let loss = |v: &[SparseVector]| flops_loss(&DocBatch::new(v.to_vec(), dim).unwrap()).loss;
        let numeric = numeric_doc_grads(&docs, loss);
        let res = flops_loss(&DocBatch::new(to_sparse(&docs), dim).unwrap());
        // the gradient w.r.t. r_{d,t} is shared by every document
        let analytic: Vec<f64> = (0..n).flat_map(|_| (0..dim).map(|t| res.grad(t as TermId))).collect();
        errors.push(rel_error(&analytic, &numeric.concat()));
    }
    errors
}

pub fn df_flops_errors() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut errors = Vec::new();
    for _ in 0..INSTANCES {
        let (n, dim) = (rng.random_range(2..6), rng.random_range(3..9));
        let docs = random_docs(&mut rng, n, dim);
        let w = PenaltyWeights::from_values((0..dim).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap();
        let loss = |v: &[SparseVector]| df_flops_loss(&DocBatch::new(v.to_vec(), dim).unwrap(), &w).unwrap().loss;
        let numeric = numeric_doc_grads(&docs, loss);
        let res = df_flops_loss(&DocBatch::new(to_sparse(&docs), dim).unwrap(), &w).unwrap();
        let analytic: Vec<f64> = (0..n).flat_map(|_| (0..dim).map(|t| res.grad(t as TermId))).collect();
        errors.push(rel_error(&analytic, &numeric.concat()));
    }
    errors
}

pub fn rank_loss_errors() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut errors = Vec::new();
    for _ in 0..INSTANCES {
        let dim = rng.random_range(4..10);
        let nq = rng.random_range(1..4);
        let nh = rng.random_range(0..3);
        let n_docs = nq * (1 + nh);
        let docs = random_docs(&mut rng, n_docs, dim);
        let queries: Vec<TermSet> = (0..nq)
            .map(|_| (0..rng.random_range(1..4)).map(|_| rng.random_range(0..dim) as TermId).collect())
            .collect();
        let positives: Vec<usize> = (0..nq).collect();
        let hard: Vec<Vec<usize>> = (0..nq).map(|i| (0..nh).map(|j| nq + i * nh + j).collect()).collect();

        let loss = |v: &[SparseVector]| rank_loss(&queries, v, &positives, &hard).unwrap().loss;
        let numeric = numeric_doc_grads(&docs, loss);
        let out = rank_loss(&queries, &to_sparse(&docs), &positives, &hard).unwrap();
        let mut analytic = vec![vec![0.0; dim]; n_docs];
        for (d, grads) in out.doc_grads.iter().enumerate() {
            for &(t, g) in grads {
                analytic[d][t as usize] = g;
            }
        }
        errors.push(rel_error(&analytic.concat(), &numeric.concat()));
    }
    errors
}

/// Small corpus of raw counts with one query per document.
fn tiny_training_data(rng: &mut ChaCha8Rng, dim: usize) -> TrainingData {
    let docs: Vec<SparseVector> = (0..20)
        .map(|i| {
            let mut entries: Vec<(TermId, f64)> = Vec::new();
            for t in 0..dim as TermId {
                if rng.random_bool(0.4) {
                    entries.push((t, rng.random_range(1..4) as f64));
                }
            }
            SparseVector::from_entries(format!("d{i}"), entries, dim).unwrap()
        })
        .collect();
    let queries: Vec<(TermSet, usize)> = docs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut q: TermSet = d.entries().iter().take(2).map(|e| e.0).collect();
            q.insert(rng.random_range(0..dim) as TermId);
            (q, i)
        })
        .collect();
    TrainingData::new(docs, queries, dim).unwrap()
}

/// Full training objective against its parameters, on 24 random coordinates per instance.
pub fn objective_errors() -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (dim, rank) = (10, 3);
    let mut errors = Vec::new();
    for instance in 0..INSTANCES {
        let data = tiny_training_data(&mut rng, dim);
        let batch = data.sample_batch(4, 2, &mut rng);
        let mut params = EncoderParams::init(dim, rank, &mut rng).unwrap();
        for b in params.bias_mut() {
            *b = rng.random_range(-0.2..0.5);
        }
        let w = PenaltyWeights::from_values((0..dim).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap();
        let penalty = if instance % 2 == 0 { Penalty::Flops } else { Penalty::DfFlops(&w) };
        let lambda = rng.random_range(0.0..2.0);

        let grads = objective(&params, &batch, lambda, penalty).unwrap().grads.flat();
        let coords: Vec<usize> = (0..24).map(|_| rng.random_range(0..params.num_params())).collect();
        let mut analytic = Vec::new();
        let mut numeric = Vec::new();
        for &i in &coords {
            let base = *params.param_mut(i);
            *params.param_mut(i) = base + H;
            let plus = objective(&params, &batch, lambda, penalty).unwrap().total_loss;
            *params.param_mut(i) = base - H;
            let minus = objective(&params, &batch, lambda, penalty).unwrap().total_loss;
            *params.param_mut(i) = base;
            analytic.push(grads[i]);
            numeric.push((plus - minus) / (2.0 * H));
        }
        errors.push(rel_error(&analytic, &numeric));
    }
    errors
}
