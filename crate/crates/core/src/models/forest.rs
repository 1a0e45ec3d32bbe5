use serde::{Deserialize, Serialize};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bin_edges, bin_of};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Candidate thresholds per feature (quantile cuts of the training data).
    pub max_bins: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 5,
            min_samples_split: 4,
            max_bins: 32,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("random_forest n_trees must be at least 1".into()));
        }
        if self.max_bins < 2 {
            return Err(Error::Config("random_forest max_bins must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn score(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(p) => return *p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ForestModel {
    trees: Vec<Tree>,
}

impl ForestModel {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.score(x)).sum::<f64>() / self.trees.len() as f64
    }
}

struct Grower<'a> {
    params: &'a ForestParams,
    binned: &'a [Vec<u16>],
    edges: &'a [Vec<f64>],
    y: &'a [u8],
    mtry: usize,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn grow(&self, rows: Vec<usize>, depth: usize, nodes: &mut Vec<Node>, rng: &mut ChaCha8Rng) -> usize {
        let id = nodes.len();
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        let leaf = pos as f64 / n as f64;
        nodes.push(Node::Leaf(leaf));
        if depth >= self.params.max_depth || n < self.params.min_samples_split || pos == 0 || pos == n {
            return id;
        }
        let width = self.edges.len();
        let candidates = sample(rng, width, self.mtry.min(width));
        let parent = gini(pos as f64, n as f64) * n as f64;
        let mut best: Option<(f64, usize, usize)> = None;
        for feature in candidates.iter() {
            let cuts = self.edges[feature].len();
            if cuts == 0 {
                continue;
            }
            let mut count = vec![0usize; cuts + 1];
            let mut positives = vec![0usize; cuts + 1];
            for &r in &rows {
                let b = self.binned[r][feature] as usize;
                count[b] += 1;
                positives[b] += usize::from(self.y[r]);
            }
            let (mut ln, mut lp) = (0usize, 0usize);
            for cut in 0..cuts {
                ln += count[cut];
                lp += positives[cut];
                let rn = n - ln;
                if ln == 0 || rn == 0 {
                    continue;
                }
                let impurity = gini(lp as f64, ln as f64) * ln as f64 + gini((pos - lp) as f64, rn as f64) * rn as f64;
                let gain = parent - impurity;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feature, cut));
                }
            }
        }
        let Some((_, feature, cut)) = best else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&r| self.binned[r][feature] as usize <= cut);
        let left = self.grow(l, depth + 1, nodes, rng);
        let right = self.grow(r, depth + 1, nodes, rng);
        nodes[id] = Node::Split {
            feature,
            threshold: self.edges[feature][cut],
            left,
            right,
        };
        id
    }
}

/// Bagged CART trees on Gini impurity with sqrt(width) features tried per node.
pub(crate) fn fit(params: &ForestParams, x: &[Vec<f64>], y: &[u8], seed: u64) -> ForestModel {
    let width = x.first().map(Vec::len).unwrap_or(0);
    let edges = bin_edges(x, width, params.max_bins);
    let binned: Vec<Vec<u16>> = x
        .iter()
        .map(|row| row.iter().zip(&edges).map(|(v, e)| bin_of(e, *v) as u16).collect())
        .collect();
    let grower = Grower {
        params,
        binned: &binned,
        edges: &edges,
        y,
        mtry: ((width as f64).sqrt().round() as usize).max(1),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    // without splits a resampled leaf only adds noise to the class prior
    if params.max_depth == 0 {
        let prior = y.iter().filter(|&&l| l == 1).count() as f64 / n as f64;
        return ForestModel {
            trees: vec![Tree { nodes: vec![Node::Leaf(prior)] }],
        };
    }
    let trees = (0..params.n_trees)
        .map(|_| {
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut nodes = Vec::new();
            grower.grow(rows, 0, &mut nodes, &mut rng);
            Tree { nodes }
        })
        .collect();
    ForestModel { trees }
}
