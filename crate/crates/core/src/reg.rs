//! FLOPS and DF-FLOPS sparsity regularizers with closed-form gradients.
//!
//! Both losses are quadratic in the per-term batch means
//! `m_t = (1/N) Σ_i r_{i,t}`:
//!
//! ```text
//! flops    = Σ_t m_t²            ∂/∂r_{j,t} = 2 m_t / N
//! df-flops = Σ_t (w_t m_t)²      ∂/∂r_{j,t} = 2 w_t² m_t / N
//! ```
//!
//! The partial derivative does not depend on `j`, so [`RegResult`] stores
//! one gradient value per term. The DF-FLOPS penalty `w_t` comes from a
//! generalized-logistic curve over the term's document-frequency ratio,
//! see [`activ`].

use serde::{Deserialize, Serialize};

use crate::df::DfTable;
use crate::error::{Error, Result};
use crate::sparse::{DocBatch, TermId};

/// Shape of the penalty curve: `alpha` is the DF ratio mapped to 0.5,
/// `beta` sets how steep the transition is around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationParams {
    alpha: f64,
    beta: f64,
}

impl ActivationParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} must lie in (0, 1)")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta {beta} must be > 0")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for ActivationParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 10.0,
        }
    }
}

/// `1 / (1 + (x^{log_α 2} − 1)^β)` for `x ∈ (0, 1]`, and `0` at `x = 0`.
///
/// `x^{log_α 2}` is evaluated as `2^{ln x / ln α}` so that `x = α` hits
/// exactly 2. The base `x^{log_α 2} − 1` is non-negative on `(0, 1]`.
///
/// # Panics
///
/// If `x` is outside `[0, 1]` or NaN.
pub fn activ(x: f64, params: &ActivationParams) -> f64 {
    assert!(
        (0.0..=1.0).contains(&x),
        "activ: argument {x} outside [0, 1]"
    );
    if x == 0.0 {
        return 0.0;
    }
    let powered = (x.ln() / params.alpha.ln()).exp2();
    let base = (powered - 1.0).max(0.0);
    1.0 / (1.0 + base.powf(params.beta))
}

/// Per-term penalty scale `w_t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    w: Vec<f64>,
}

impl PenaltyWeights {
    /// All-ones weights, under which DF-FLOPS reduces to FLOPS.
    pub fn ones(dim: usize) -> Self {
        Self { w: vec![1.0; dim] }
    }

    pub fn from_values(w: Vec<f64>) -> Result<Self> {
        if let Some(t) = w.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "penalty weight {} for term {t} outside [0, 1]",
                w[t]
            )));
        }
        Ok(Self { w })
    }

    pub fn get(&self, term: TermId) -> f64 {
        self.w[term as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// `w_t = activ(DF_t / |C|)` for every term of `df`.
pub fn penalty_weights(df: &DfTable, params: &ActivationParams) -> PenaltyWeights {
    let w = (0..df.dim() as TermId)
        .map(|t| activ(df.ratio(t), params))
        .collect();
    PenaltyWeights { w }
}

/// Loss value plus the per-term partial derivative shared by every vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RegResult {
    pub loss: f64,
    /// `(t, ∂loss/∂r_{j,t})` for every term with a non-zero batch sum,
    /// ascending by term. Terms not listed have zero gradient.
    pub term_grads: Vec<(TermId, f64)>,
}

impl RegResult {
    /// `∂loss/∂r_{j,t}`; identical for every vector `j` of the batch.
    pub fn grad(&self, term: TermId) -> f64 {
        match self.term_grads.binary_search_by_key(&term, |&(t, _)| t) {
            Ok(i) => self.term_grads[i].1,
            Err(_) => 0.0,
        }
    }
}

/// Per-term sums over the batch, ascending by term, zero sums skipped.
fn term_sums(batch: &DocBatch) -> Vec<(TermId, f64)> {
    let mut sums = vec![0.0f64; batch.dim()];
    let mut touched = vec![false; batch.dim()];
    for v in batch.vectors() {
        for &(t, r) in v.entries() {
            sums[t as usize] += r;
            touched[t as usize] = true;
        }
    }
    touched
        .iter()
        .enumerate()
        .filter(|&(t, &hit)| hit && sums[t] != 0.0)
        .map(|(t, _)| (t as TermId, sums[t]))
        .collect()
}

/// `Σ_t ((1/N) Σ_i r_{i,t})²`.
pub fn flops_loss(batch: &DocBatch) -> RegResult {
    let n = batch.len() as f64;
    let mut loss = 0.0;
    let mut term_grads = Vec::new();
    for (t, s) in term_sums(batch) {
        let m = s / n;
        loss += m * m;
        term_grads.push((t, 2.0 * m / n));
    }
    RegResult { loss, term_grads }
}

/// `Σ_t ((w_t/N) Σ_i r_{i,t})²`.
///
/// With every `w_t = 1` the result is bit-identical to [`flops_loss`].
pub fn df_flops_loss(batch: &DocBatch, weights: &PenaltyWeights) -> Result<RegResult> {
    if weights.len() != batch.dim() {
        return Err(Error::InvalidArgument(format!(
            "penalty weights have length {}, batch dimension is {}",
            weights.len(),
            batch.dim()
        )));
    }
    let n = batch.len() as f64;
    let mut loss = 0.0;
    let mut term_grads = Vec::new();
    for (t, s) in term_sums(batch) {
        let w = weights.get(t);
        let m = w * (s / n);
        loss += m * m;
        term_grads.push((t, 2.0 * w * m / n));
    }
    Ok(RegResult { loss, term_grads })
}

/// Quadratic warmup of the regularization coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    pub peak_lambda: f64,
    pub warmup_steps: usize,
}

/// `peak_lambda · min(1, (step / warmup_steps)²)`.
pub fn lambda_at(step: usize, schedule: &LambdaSchedule) -> f64 {
    let warmup = schedule.warmup_steps.max(1) as f64;
    let progress = (step as f64 / warmup).min(1.0);
    schedule.peak_lambda * progress * progress
}
