use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticParams {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.1,
        }
    }
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "logistic learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LogisticModel {
    weights: Vec<f64>,
    bias: f64,
}

impl LogisticModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.bias + x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>())
    }
}

/// Full-batch gradient descent on the mean log-loss, starting from zero weights.
pub(crate) fn fit(params: &LogisticParams, x: &[Vec<f64>], y: &[u8]) -> LogisticModel {
    let n = x.len() as f64;
    let width = x.first().map(Vec::len).unwrap_or(0);
    let mut model = LogisticModel {
        weights: vec![0.0; width],
        bias: 0.0,
    };
    let mut grad = vec![0.0; width];
    for _ in 0..params.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let err = model.score(row) - f64::from(label);
            grad_b += err;
            for (g, v) in grad.iter_mut().zip(row) {
                *g += err * v;
            }
        }
        model.bias -= params.learning_rate * grad_b / n;
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= params.learning_rate * g / n;
        }
    }
    model
}
