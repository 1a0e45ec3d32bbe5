//! Binary classifiers behind one interface, plus CSV export of feature
//! matrices for models that live outside this crate.
//!
//! Every model standardizes its inputs with statistics from the training
//! set and predicts label 1 iff its score is strictly above 0.5.

mod boost;
mod export;
mod forest;
mod logistic;

use std::fmt;
use std::str::FromStr;

pub use boost::BoostParams;
pub use export::{export_features, write_feature_csv};
pub use forest::ForestParams;
pub use logistic::LogisticParams;

use crate::error::{Error, Result};

/// Rows of `(date, features, label)` sharing one column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dates: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub combo: u8,
    pub layout: Vec<String>,
}

impl Dataset {
    pub fn new(
        dates: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        combo: u8,
        layout: Vec<String>,
    ) -> Result<Self> {
        let ds = Self {
            dates,
            features,
            labels,
            combo,
            layout,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn empty(combo: u8, layout: Vec<String>) -> Self {
        Self {
            dates: Vec::new(),
            features: Vec::new(),
            labels: Vec::new(),
            combo,
            layout,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dates.len();
        if self.features.len() != n || self.labels.len() != n {
            return Err(Error::Validation(format!(
                "dataset has {n} dates, {} feature rows, {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        let width = self.layout.len();
        if let Some((i, row)) = self.features.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::LayoutMismatch {
                expected: width,
                actual: self.features[i].len().max(row.len()),
            });
        }
        if let Some(l) = self.labels.iter().find(|l| **l > 1) {
            return Err(Error::Validation(format!("label {l} is not binary")));
        }
        if self.dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("dataset dates must be unique and sorted".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn width(&self) -> usize {
        self.layout.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Logistic,
    RandomForest,
    GbStumps,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logistic => "logistic",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GbStumps => "gb_stumps",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(ModelKind::Logistic),
            "random_forest" => Ok(ModelKind::RandomForest),
            "gb_stumps" => Ok(ModelKind::GbStumps),
            other => Err(Error::Config(format!(
                "unknown model {other:?} (expected logistic, random_forest or gb_stumps)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Logistic(LogisticParams),
    RandomForest(ForestParams),
    GbStumps(BoostParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Logistic(_) => ModelKind::Logistic,
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::GbStumps(_) => ModelKind::GbStumps,
        }
    }

    pub fn defaults(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Logistic => ModelParams::Logistic(LogisticParams::default()),
            ModelKind::RandomForest => ModelParams::RandomForest(ForestParams::default()),
            ModelKind::GbStumps => ModelParams::GbStumps(BoostParams::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Logistic(p) => p.validate(),
            ModelParams::RandomForest(p) => p.validate(),
            ModelParams::GbStumps(p) => p.validate(),
        }
    }
}

/// Model family, hyperparameters and PRNG seed (ChaCha8).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub params: ModelParams,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(params: ModelParams, seed: u64) -> Self {
        Self { params, seed }
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }
}

/// Per-column centring and scaling learned on the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>], width: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mean: Vec<f64> = (0..width).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..width)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                // constant columns map to 0
                if sd > 1e-12 * (1.0 + mean[j].abs()) {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Fitted {
    Constant(u8),
    Logistic(logistic::LogisticModel),
    Forest(forest::ForestModel),
    Boost(boost::BoostModel),
}

/// A trained classifier; immutable and shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    kind: ModelKind,
    standardizer: Standardizer,
    fitted: Fitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: u8,
    pub score: f64,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Self {
            label: u8::from(score > 0.5),
            score,
        }
    }
}

pub fn fit(spec: &ClassifierSpec, train: &Dataset) -> Result<Model> {
    spec.params.validate()?;
    train.validate()?;
    if train.is_empty() {
        return Err(Error::Data("cannot fit on an empty training set".into()));
    }
    if train.features.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Data("training features contain NaN or infinite values".into()));
    }
    let width = train.width();
    let standardizer = Standardizer::fit(&train.features, width);
    let positives = train.labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == train.len() {
        let class = u8::from(positives > 0);
        log::warn!(
            "training set of {} rows has a single class ({class}); fitting a constant {} model",
            train.len(),
            spec.kind()
        );
        return Ok(Model {
            kind: spec.kind(),
            standardizer,
            fitted: Fitted::Constant(class),
        });
    }
    let x: Vec<Vec<f64>> = train.features.iter().map(|r| standardizer.transform(r)).collect();
    let y = &train.labels;
    let fitted = match &spec.params {
        ModelParams::Logistic(p) => Fitted::Logistic(logistic::fit(p, &x, y)),
        ModelParams::RandomForest(p) => Fitted::Forest(forest::fit(p, &x, y, spec.seed)),
        ModelParams::GbStumps(p) => Fitted::Boost(boost::fit(p, &x, y)),
    };
    Ok(Model {
        kind: spec.kind(),
        standardizer,
        fitted,
    })
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.fitted, Fitted::Constant(_))
    }

    pub fn width(&self) -> usize {
        self.standardizer.width()
    }

    pub fn score(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.width() {
            return Err(Error::LayoutMismatch {
                expected: self.width(),
                actual: row.len(),
            });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Data("features contain NaN or infinite values".into()));
        }
        let x = self.standardizer.transform(row);
        Ok(match &self.fitted {
            Fitted::Constant(c) => f64::from(*c),
            Fitted::Logistic(m) => m.score(&x),
            Fitted::Forest(m) => m.score(&x),
            Fitted::Boost(m) => m.score(&x),
        })
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        rows.iter().map(|r| self.score(r).map(Prediction::from_score)).collect()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Quantile cut points per column, for histogram-based split search.
pub(crate) fn bin_edges(x: &[Vec<f64>], width: usize, max_bins: usize) -> Vec<Vec<f64>> {
    (0..width)
        .map(|j| {
            let mut col: Vec<f64> = x.iter().map(|r| r[j]).collect();
            col.sort_by(f64::total_cmp);
            col.dedup();
            if col.len() <= 1 {
                return Vec::new();
            }
            let cuts = (max_bins - 1).min(col.len() - 1);
            let mut edges: Vec<f64> = (1..=cuts)
                .map(|c| {
                    let pos = c * (col.len() - 1) / (cuts + 1);
                    let pos = pos.min(col.len() - 2);
                    0.5 * (col[pos] + col[pos + 1])
                })
                .collect();
            edges.dedup();
            edges
        })
        .collect()
}

/// Index of the first edge `>= v` (so `v <= edges[b]` sends `v` left of cut `b`).
pub(crate) fn bin_of(edges: &[f64], v: f64) -> usize {
    edges.partition_point(|&e| e < v)
}
