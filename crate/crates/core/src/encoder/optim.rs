//! Parameter update rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::params::{EncoderParams, ParamGrads};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// Plain gradient descent.
    Sgd,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8 and bias correction.
    Adam,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
        })
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            other => Err(Error::InvalidArgument(format!(
                "unknown optimizer `{other}` (expected sgd or adam)"
            ))),
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// Moment estimates carried across steps; empty for SGD.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: Optimizer,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl OptimizerState {
    pub fn new(kind: Optimizer, params: &EncoderParams) -> Self {
        let n = match kind {
            Optimizer::Sgd => 0,
            Optimizer::Adam => params.num_params(),
        };
        Self {
            kind,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn kind(&self) -> Optimizer {
        self.kind
    }

    /// Updates `params` in place. A zero learning rate leaves them untouched.
    pub fn step(&mut self, params: &mut EncoderParams, grads: &ParamGrads, learning_rate: f64) {
        match self.kind {
            Optimizer::Sgd => params.apply_gradient(grads, learning_rate),
            Optimizer::Adam => {
                self.t = self.t.saturating_add(1);
                if learning_rate == 0.0 {
                    return;
                }
                let c1 = 1.0 - BETA1.powi(self.t);
                let c2 = 1.0 - BETA2.powi(self.t);
                let g = grads.u.iter().chain(&grads.vp).chain(&grads.b);
                let p = params.u.iter_mut().chain(params.vp.iter_mut()).chain(params.b.iter_mut());
                for (((p, &g), m), v) in p.zip(g).zip(&mut self.m).zip(&mut self.v) {
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    *p -= learning_rate * (*m / c1) / ((*v / c2).sqrt() + EPS);
                }
            }
        }
    }
}
