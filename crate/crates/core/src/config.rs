//! Pipeline configuration: one TOML file with a section per stage.
//!
//! Enumerated settings are stored as strings so the file stays readable;
//! the typed accessors validate them. [`CONFIG_KEYS`] documents every key.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backtest::TradeMode;
use crate::error::{Error, Result};
use crate::features::{ComboCode, FeatureConfig, InfinitePolicy};
use crate::models::{BoostParams, ClassifierSpec, ForestParams, LogisticParams, ModelKind, ModelParams};
use crate::persistence::{FiltrationKind, MaxRadius, MAX_HOMOLOGY_DIM};
use crate::pointcloud::{Bandwidth, CloudKind, LagSet};

/// `(key, description)` for every configuration key.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("data.prices", "index closes CSV `date,close` (required)"),
    ("data.constituents", "constituent returns CSV `date,ticker,return` (needed by the correlation cloud)"),
    ("data.factors", "factor exposures CSV `date,ticker,f1..fd` (needed by the factor cloud)"),
    ("data.factor_count", "number of factor columns d in the factors file"),
    ("cloud.lags", "Takens lag set, strictly increasing, first lag 0 (default [0,5,20,60])"),
    ("cloud.takens_window", "index returns per Takens cloud; the cloud has window - max lag points (default 120)"),
    ("cloud.correlation_window", "trading days per correlation window (default 30)"),
    ("cloud.mds_dim", "classical MDS target dimension (default 4)"),
    ("cloud.kpca_dim", "kernel PCA target dimension, must be below factor_count (default 4)"),
    ("cloud.bandwidth", "Gaussian kernel bandwidth: \"median\" or a positive number as a string (default \"median\")"),
    ("persistence.filtration", "\"rips\" or \"alpha\" (default \"rips\")"),
    ("persistence.max_dim", "highest homology dimension, 0..=2 (default 1)"),
    ("persistence.max_radius", "filtration cut-off: \"auto\" (cloud diameter) or a positive number as a string"),
    ("features.betti_bins", "Betti curve resolution m (default 100)"),
    ("features.landscape_k_max", "landscape layers in the Lp norm (default 5)"),
    ("features.landscape_p", "landscape norm exponent p >= 1 (default 2)"),
    ("features.infinite_policy", "\"clamp-to-max\" or \"drop\" for bars that never die"),
    ("models.kinds", "classifiers to run: logistic, random_forest, gb_stumps"),
    ("models.logistic.epochs", "gradient-descent epochs (default 500)"),
    ("models.logistic.learning_rate", "gradient-descent step (default 0.1)"),
    ("models.random_forest.n_trees", "trees in the forest, >= 1 (default 50)"),
    ("models.random_forest.max_depth", "maximum tree depth; 0 = majority class (default 5)"),
    ("models.random_forest.min_samples_split", "smallest node that may be split (default 4)"),
    ("models.random_forest.max_bins", "candidate thresholds per feature (default 32)"),
    ("models.gb_stumps.n_rounds", "boosting rounds (default 50)"),
    ("models.gb_stumps.learning_rate", "shrinkage per round (default 0.1)"),
    ("models.gb_stumps.lambda", "L2 penalty on leaf values (default 1)"),
    ("models.gb_stumps.max_bins", "candidate thresholds per feature (default 32)"),
    ("backtest.train_end", "last training date or month (YYYY-MM-DD or YYYY-MM)"),
    ("backtest.predict_end", "last predicted date or month"),
    ("backtest.trade_mode", "\"long_short\" or \"long_flat\" (default \"long_short\")"),
    ("backtest.label_horizon", "days ahead the up/down label looks (default 1)"),
    ("backtest.clouds", "cloud types to sweep: takens, correlation, factor"),
    ("backtest.combos", "feature combination codes 1..=15 to sweep (default all)"),
    ("run.seed", "root seed; per-cell seeds are hashed from it"),
    ("run.output_dir", "directory for reports, equity curves and exports"),
    ("run.jobs", "worker threads; 0 = available parallelism"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub prices: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constituents: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<PathBuf>,
    pub factor_count: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            prices: PathBuf::new(),
            constituents: None,
            factors: None,
            factor_count: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloudSection {
    pub lags: Vec<usize>,
    pub takens_window: usize,
    pub correlation_window: usize,
    pub mds_dim: usize,
    pub kpca_dim: usize,
    pub bandwidth: String,
}

impl Default for CloudSection {
    fn default() -> Self {
        Self {
            lags: LagSet::default().lags().to_vec(),
            takens_window: 120,
            correlation_window: 30,
            mds_dim: 4,
            kpca_dim: 4,
            bandwidth: "median".into(),
        }
    }
}

impl CloudSection {
    pub fn lag_set(&self) -> Result<LagSet> {
        LagSet::new(self.lags.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn bandwidth(&self) -> Result<Bandwidth<f64>> {
        if self.bandwidth == "median" {
            return Ok(Bandwidth::Median);
        }
        let v: f64 = self
            .bandwidth
            .parse()
            .map_err(|_| Error::Config(format!("cloud.bandwidth {:?} is neither \"median\" nor a number", self.bandwidth)))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("cloud.bandwidth must be positive, got {v}")));
        }
        Ok(Bandwidth::Fixed(v))
    }

    pub fn validate(&self) -> Result<()> {
        let lags = self.lag_set()?;
        if self.takens_window <= lags.max_lag() {
            return Err(Error::Config(format!(
                "cloud.takens_window {} must exceed the largest lag {}",
                self.takens_window,
                lags.max_lag()
            )));
        }
        if self.correlation_window < 2 {
            return Err(Error::Config("cloud.correlation_window must be at least 2".into()));
        }
        if self.mds_dim == 0 || self.kpca_dim == 0 {
            return Err(Error::Config("cloud.mds_dim and cloud.kpca_dim must be at least 1".into()));
        }
        self.bandwidth()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PersistenceSection {
    pub filtration: String,
    pub max_dim: usize,
    pub max_radius: String,
}

impl Default for PersistenceSection {
    fn default() -> Self {
        Self {
            filtration: "rips".into(),
            max_dim: 1,
            max_radius: "auto".into(),
        }
    }
}

impl PersistenceSection {
    pub fn filtration(&self) -> Result<FiltrationKind> {
        self.filtration.parse()
    }

    pub fn max_radius(&self) -> Result<MaxRadius<f64>> {
        if self.max_radius == "auto" {
            return Ok(MaxRadius::Auto);
        }
        match self.max_radius.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(MaxRadius::Fixed(v)),
            _ => Err(Error::Config(format!(
                "persistence.max_radius {:?} is neither \"auto\" nor a positive number",
                self.max_radius
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.filtration()?;
        self.max_radius()?;
        if self.max_dim > MAX_HOMOLOGY_DIM {
            return Err(Error::Config(format!(
                "persistence.max_dim {} exceeds {MAX_HOMOLOGY_DIM}",
                self.max_dim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesSection {
    pub betti_bins: usize,
    pub landscape_k_max: usize,
    pub landscape_p: f64,
    pub infinite_policy: String,
}

impl Default for FeaturesSection {
    fn default() -> Self {
        let d = FeatureConfig::default();
        Self {
            betti_bins: d.betti_bins,
            landscape_k_max: d.landscape_k_max,
            landscape_p: d.landscape_p,
            infinite_policy: d.infinite_policy.name().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsSection {
    pub kinds: Vec<String>,
    pub logistic: LogisticParams,
    pub random_forest: ForestParams,
    pub gb_stumps: BoostParams,
}

impl Default for ModelsSection {
    fn default() -> Self {
        Self {
            kinds: vec!["logistic".into(), "gb_stumps".into()],
            logistic: LogisticParams::default(),
            random_forest: ForestParams::default(),
            gb_stumps: BoostParams::default(),
        }
    }
}

impl ModelsSection {
    pub fn kinds(&self) -> Result<Vec<ModelKind>> {
        self.kinds.iter().map(|k| k.parse()).collect()
    }

    pub fn params(&self, kind: ModelKind) -> ModelParams {
        match kind {
            ModelKind::Logistic => ModelParams::Logistic(self.logistic.clone()),
            ModelKind::RandomForest => ModelParams::RandomForest(self.random_forest.clone()),
            ModelKind::GbStumps => ModelParams::GbStumps(self.gb_stumps.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestSection {
    pub train_end: String,
    pub predict_end: String,
    pub trade_mode: String,
    pub label_horizon: usize,
    pub clouds: Vec<String>,
    pub combos: Vec<u8>,
}

impl Default for BacktestSection {
    fn default() -> Self {
        Self {
            train_end: String::new(),
            predict_end: String::new(),
            trade_mode: TradeMode::LongShort.name().into(),
            label_horizon: 1,
            clouds: CloudKind::ALL.iter().map(|c| c.name().to_string()).collect(),
            combos: (1..=15).collect(),
        }
    }
}

impl BacktestSection {
    pub fn trade_mode(&self) -> Result<TradeMode> {
        self.trade_mode.parse()
    }

    pub fn clouds(&self) -> Result<Vec<CloudKind>> {
        self.clouds.iter().map(|c| c.parse()).collect()
    }

    pub fn combos(&self) -> Result<Vec<ComboCode>> {
        self.combos.iter().map(|&c| ComboCode::new(c).map_err(|e| Error::Config(e.to_string()))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub jobs: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 42,
            output_dir: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataSection,
    pub cloud: CloudSection,
    pub persistence: PersistenceSection,
    pub features: FeaturesSection,
    pub models: ModelsSection,
    pub backtest: BacktestSection,
    pub run: RunSection,
}

impl PipelineConfig {
    /// Reads, resolves relative paths against the file's directory and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml(&text, base)
    }

    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.prices);
        self.data.constituents.as_mut().map(fix);
        self.data.factors.as_mut().map(fix);
        fix(&mut self.run.output_dir);
    }

    /// Range and consistency checks, plus existence of every data file.
    pub fn validate(&self) -> Result<()> {
        if self.data.prices.as_os_str().is_empty() {
            return Err(Error::Config("data.prices is required".into()));
        }
        for p in [Some(&self.data.prices), self.data.constituents.as_ref(), self.data.factors.as_ref()]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(Error::Config(format!("data file {} does not exist", p.display())));
            }
        }
        if self.data.factors.is_some() && self.data.factor_count == 0 {
            return Err(Error::Config("data.factor_count must be set when data.factors is".into()));
        }
        self.cloud.validate()?;
        self.persistence.validate()?;
        self.feature_config()?.validate()?;
        self.models.kinds()?;
        for k in [ModelKind::Logistic, ModelKind::RandomForest, ModelKind::GbStumps] {
            self.models.params(k).validate()?;
        }
        self.backtest.trade_mode()?;
        if self.backtest.label_horizon == 0 {
            return Err(Error::Config("backtest.label_horizon must be at least 1".into()));
        }
        self.backtest.clouds()?;
        if self.data.factors.is_some() && self.cloud.kpca_dim >= self.data.factor_count {
            return Err(Error::Config(format!(
                "cloud.kpca_dim {} must be below data.factor_count {}",
                self.cloud.kpca_dim, self.data.factor_count
            )));
        }
        self.backtest.combos()?;
        Ok(())
    }

    /// Config error unless the data each cloud type needs was supplied.
    pub fn check_cloud_inputs(&self, clouds: &[CloudKind]) -> Result<()> {
        for kind in clouds {
            match kind {
                CloudKind::Correlation if self.data.constituents.is_none() => {
                    return Err(Error::Config("the correlation cloud needs data.constituents".into()))
                }
                CloudKind::Factor if self.data.factors.is_none() => {
                    return Err(Error::Config("the factor cloud needs data.factors".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn feature_config(&self) -> Result<FeatureConfig> {
        Ok(FeatureConfig {
            max_dim: self.persistence.max_dim,
            betti_bins: self.features.betti_bins,
            landscape_k_max: self.features.landscape_k_max,
            landscape_p: self.features.landscape_p,
            infinite_policy: self.features.infinite_policy.parse::<InfinitePolicy>()?,
        })
    }

    /// Classifier for one sweep cell, seeded from the root seed and the cell's names.
    pub fn classifier(&self, cloud: CloudKind, combo: ComboCode, kind: ModelKind) -> ClassifierSpec {
        ClassifierSpec::new(self.models.params(kind), cell_seed(self.run.seed, cloud, combo, kind))
    }
}

/// First eight bytes of SHA-256 over the root seed and the cell's names.
pub fn cell_seed(root: u64, cloud: CloudKind, combo: ComboCode, model: ModelKind) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update(format!("{}/{}/{}", cloud.name(), combo.value(), model.name()).as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn write_data(dir: &Path) {
        fs::write(dir.join("prices.csv"), "date,close\n2020-01-01,1\n").unwrap();
        fs::write(dir.join("cons.csv"), "date,ticker,return\n").unwrap();
        fs::write(dir.join("fac.csv"), "date,ticker,f1\n").unwrap();
    }

    const MINIMAL: &str = r#"
[data]
prices = "prices.csv"
constituents = "cons.csv"
factors = "fac.csv"
factor_count = 6

[backtest]
train_end = "2020-06"
predict_end = "2020-12"
"#;

    #[test]
    fn defaults_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write_data(dir.path());
        let cfg = PipelineConfig::from_toml(MINIMAL, dir.path()).unwrap();
        assert_eq!(cfg.cloud.lags, vec![0, 5, 20, 60]);
        assert_eq!(cfg.backtest.combos.len(), 15);
        assert_eq!(cfg.data.prices, dir.path().join("prices.csv"));
        let dumped = cfg.to_toml().unwrap();
        let again = PipelineConfig::from_toml(&dumped, Path::new("/nonexistent")).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn every_dumped_key_is_documented() {
        let dir = tempfile::tempdir().unwrap();
        write_data(dir.path());
        let cfg = PipelineConfig::from_toml(MINIMAL, dir.path()).unwrap();
        let value: toml::Table = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        fn walk(prefix: &str, t: &toml::Table, out: &mut Vec<String>) {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                match v {
                    toml::Value::Table(inner) => walk(&key, inner, out),
                    _ => out.push(key),
                }
            }
        }
        let mut keys = Vec::new();
        walk("", &value, &mut keys);
        let documented: BTreeSet<&str> = CONFIG_KEYS.iter().map(|(k, _)| *k).collect();
        for k in &keys {
            assert!(documented.contains(k.as_str()), "undocumented key {k}");
        }
        assert_eq!(keys.len(), documented.len());
    }

    #[test]
    fn rejects_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        write_data(dir.path());
        let cases = [
            "[cloud]\nbandwidth = \"0\"",
            "[cloud]\nlags = [1, 5]",
            "[persistence]\nmax_dim = 3",
            "[models]\nkinds = [\"svm\"]",
            "[models.random_forest]\nn_trees = 0",
            "[backtest]\ncombos = [0]",
            "[unknown]\nx = 1",
        ];
        for extra in cases {
            let text = match extra.strip_prefix("[backtest]\n") {
                Some(rest) => MINIMAL.replace("predict_end = \"2020-12\"", &format!("predict_end = \"2020-12\"\n{rest}")),
                None => format!("{MINIMAL}\n{extra}\n"),
            };
            let err = PipelineConfig::from_toml(&text, dir.path()).expect_err(extra);
            assert_eq!(err.class(), crate::ErrorClass::Config, "{extra}: {err}");
        }
    }

    #[test]
    fn missing_file_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = PipelineConfig::from_toml(MINIMAL, dir.path()).unwrap_err();
        assert!(err.to_string().contains("does not exist"), "{err}");
    }

    #[test]
    fn cell_seeds_differ_and_repeat() {
        let c = ComboCode::new(9).unwrap();
        let a = cell_seed(1, CloudKind::Takens, c, ModelKind::Logistic);
        assert_eq!(a, cell_seed(1, CloudKind::Takens, c, ModelKind::Logistic));
        assert_ne!(a, cell_seed(1, CloudKind::Factor, c, ModelKind::Logistic));
        assert_ne!(a, cell_seed(2, CloudKind::Takens, c, ModelKind::Logistic));
    }
}
