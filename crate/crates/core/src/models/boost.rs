use serde::{Deserialize, Serialize};

use super::{bin_edges, bin_of, sigmoid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub max_bins: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self {
            n_rounds: 50,
            learning_rate: 0.1,
            lambda: 1.0,
            max_bins: 32,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "gb_stumps learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config("gb_stumps lambda must be non-negative".into()));
        }
        if self.max_bins < 2 {
            return Err(Error::Config("gb_stumps max_bins must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Stump {
    feature: usize,
    threshold: f64,
    left: f64,
    right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BoostModel {
    base: f64,
    stumps: Vec<Stump>,
}

impl BoostModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        let margin = self.base
            + self
                .stumps
                .iter()
                .map(|s| if x[s.feature] <= s.threshold { s.left } else { s.right })
                .sum::<f64>();
        sigmoid(margin)
    }
}

/// Depth-one trees fitted to the logistic-loss gradient with Newton leaf values.
pub(crate) fn fit(params: &BoostParams, x: &[Vec<f64>], y: &[u8]) -> BoostModel {
    let n = x.len();
    let width = x.first().map(Vec::len).unwrap_or(0);
    let edges = bin_edges(x, width, params.max_bins);
    let binned: Vec<Vec<u16>> = x
        .iter()
        .map(|row| row.iter().zip(&edges).map(|(v, e)| bin_of(e, *v) as u16).collect())
        .collect();
    let prior = (y.iter().map(|&l| f64::from(l)).sum::<f64>() / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let base = (prior / (1.0 - prior)).ln();
    let mut margin = vec![base; n];
    let mut stumps = Vec::with_capacity(params.n_rounds);
    let lambda = params.lambda;
    let objective = |g: f64, h: f64| g * g / (h + lambda + 1e-12);
    for _ in 0..params.n_rounds {
        let (grad, hess): (Vec<f64>, Vec<f64>) = margin
            .iter()
            .zip(y)
            .map(|(m, &l)| {
                let p = sigmoid(*m);
                (p - f64::from(l), p * (1.0 - p))
            })
            .unzip();
        let g_total: f64 = grad.iter().sum();
        let h_total: f64 = hess.iter().sum();
        let root = objective(g_total, h_total);
        let mut best: Option<(f64, usize, usize, f64, f64)> = None;
        for (feature, cuts) in edges.iter().enumerate() {
            if cuts.is_empty() {
                continue;
            }
            let mut g_bin = vec![0.0; cuts.len() + 1];
            let mut h_bin = vec![0.0; cuts.len() + 1];
            for i in 0..n {
                let b = binned[i][feature] as usize;
                g_bin[b] += grad[i];
                h_bin[b] += hess[i];
            }
            let (mut gl, mut hl) = (0.0, 0.0);
            for cut in 0..cuts.len() {
                gl += g_bin[cut];
                hl += h_bin[cut];
                let (gr, hr) = (g_total - gl, h_total - hl);
                let gain = objective(gl, hl) + objective(gr, hr) - root;
                if gain > 1e-12 && best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, feature, cut, gl / (hl + lambda + 1e-12), gr / (hr + lambda + 1e-12)));
                }
            }
        }
        let Some((_, feature, cut, wl, wr)) = best else {
            break;
        };
        let stump = Stump {
            feature,
            threshold: edges[feature][cut],
            left: -params.learning_rate * wl,
            right: -params.learning_rate * wr,
        };
        for i in 0..n {
            margin[i] += if binned[i][feature] as usize <= cut { stump.left } else { stump.right };
        }
        stumps.push(stump);
    }
    BoostModel { base, stumps }
}
