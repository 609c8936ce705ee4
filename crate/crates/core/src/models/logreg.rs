//! Logistic-regression baseline over averaged static word vectors,
//! L2-regularized, fit with full-batch adaptive-moment gradient descent
//! from a zero initialization (deterministic for a given dataset).

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::revisions::DesirabilityLabel;

use super::label_from_probability;

/// One baseline input: fixed-length features plus the gold label.
#[derive(Debug, Clone)]
pub struct FeatureInstance {
    pub id: String,
    pub student_id: String,
    pub features: Array1<f64>,
    pub label: DesirabilityLabel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticRegression {
    pub fn predict_proba(&self, features: &[f64]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(features)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias;
        1.0 / (1.0 + (-z).exp())
    }

    pub fn predict(&self, features: &[f64]) -> (f64, DesirabilityLabel) {
        let p = self.predict_proba(features);
        (p, label_from_probability(p))
    }
}

const L2: f64 = 1e-4;
const LEARNING_RATE: f64 = 0.05;
const ITERATIONS: usize = 400;

/// Fit the baseline. The optimizer is full-batch, so the result depends
/// only on the data; the seed is accepted for manifest symmetry with the
/// neural path.
pub fn train_logreg_baseline(data: &[FeatureInstance], _seed: u64) -> Result<LogisticRegression> {
    if data.is_empty() {
        return Err(Error::TooFewInstances { have: 0, need: 1 });
    }
    let positives = data
        .iter()
        .filter(|d| d.label == DesirabilityLabel::Desirable)
        .count();
    if positives == 0 || positives == data.len() {
        return Err(Error::SingleClass);
    }
    let dim = data[0].features.len();
    let n = data.len() as f64;

    let mut weights = Array1::<f64>::zeros(dim);
    let mut bias = 0.0f64;
    let (mut m_w, mut v_w) = (Array1::<f64>::zeros(dim), Array1::<f64>::zeros(dim));
    let (mut m_b, mut v_b) = (0.0f64, 0.0f64);
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);

    for t in 1..=ITERATIONS {
        let mut grad_w = Array1::<f64>::zeros(dim);
        let mut grad_b = 0.0;
        for inst in data {
            let z = weights.dot(&inst.features) + bias;
            let p = 1.0 / (1.0 + (-z).exp());
            let target = match inst.label {
                DesirabilityLabel::Desirable => 1.0,
                DesirabilityLabel::Undesirable => 0.0,
            };
            let err = p - target;
            grad_w.scaled_add(err / n, &inst.features);
            grad_b += err / n;
        }
        grad_w.scaled_add(L2, &weights);

        let bc1 = 1.0 - beta1.powi(t as i32);
        let bc2 = 1.0 - beta2.powi(t as i32);
        for k in 0..dim {
            m_w[k] = beta1 * m_w[k] + (1.0 - beta1) * grad_w[k];
            v_w[k] = beta2 * v_w[k] + (1.0 - beta2) * grad_w[k] * grad_w[k];
            weights[k] -= LEARNING_RATE * (m_w[k] / bc1) / ((v_w[k] / bc2).sqrt() + eps);
        }
        m_b = beta1 * m_b + (1.0 - beta1) * grad_b;
        v_b = beta2 * v_b + (1.0 - beta2) * grad_b * grad_b;
        bias -= LEARNING_RATE * (m_b / bc1) / ((v_b / bc2).sqrt() + eps);
    }

    Ok(LogisticRegression {
        weights: weights.to_vec(),
        bias,
    })
}
