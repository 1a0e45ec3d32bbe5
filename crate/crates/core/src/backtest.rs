//! Monthly walk-forward evaluation and the four report metrics.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::data::{label_updown, make_folds, on_or_before, ReturnPanel, RollingFold};
use crate::error::{Error, Result};
use crate::features::ComboCode;
use crate::models::{fit, ClassifierSpec, Dataset, ModelKind};
use crate::pipeline::{first_buildable, load_panel, FeatureStore};
use crate::pointcloud::CloudKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TradeMode {
    /// +1 on a predicted up day, -1 otherwise.
    #[default]
    LongShort,
    /// +1 on a predicted up day, flat otherwise.
    LongFlat,
}

impl TradeMode {
    pub fn name(self) -> &'static str {
        match self {
            TradeMode::LongShort => "long_short",
            TradeMode::LongFlat => "long_flat",
        }
    }

    pub fn position(self, prediction: u8) -> i8 {
        match (self, prediction) {
            (_, 1) => 1,
            (TradeMode::LongShort, _) => -1,
            (TradeMode::LongFlat, _) => 0,
        }
    }
}

impl FromStr for TradeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "long_short" => Ok(TradeMode::LongShort),
            "long_flat" => Ok(TradeMode::LongFlat),
            other => Err(Error::Config(format!(
                "unknown trade mode {other:?} (expected long_short or long_flat)"
            ))),
        }
    }
}

impl fmt::Display for TradeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One trading day: the position taken at `date` earns the next day's return.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeEntry {
    pub date: String,
    pub prediction: u8,
    pub position: i8,
    pub ret: f64,
    pub equity: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TradeLog {
    pub entries: Vec<TradeEntry>,
}

impl TradeLog {
    /// Equity before the first trade (1) followed by equity after each trade.
    pub fn equity_path(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.entries.iter().map(|e| e.equity)).collect()
    }

    pub fn final_equity(&self) -> f64 {
        self.entries.last().map_or(1.0, |e| e.equity)
    }

    /// `date,position,return,equity`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Data(format!("writing equity csv: {e}"));
        w.write_record(["date", "position", "return", "equity"]).map_err(err)?;
        for e in &self.entries {
            w.write_record([e.date.clone(), e.position.to_string(), format!("{:?}", e.ret), format!("{:?}", e.equity)])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Data(e.to_string()))
    }
}

/// Compounds `position · r` day by day from equity 1.
pub fn simulate(dates: &[String], predictions: &[u8], next_returns: &[f64], mode: TradeMode) -> Result<TradeLog> {
    if dates.len() != predictions.len() || predictions.len() != next_returns.len() {
        return Err(Error::Validation(format!(
            "simulate needs one return per prediction ({} dates, {} predictions, {} returns)",
            dates.len(),
            predictions.len(),
            next_returns.len()
        )));
    }
    let mut equity = 1.0;
    let mut entries = Vec::with_capacity(dates.len());
    for ((date, &prediction), &ret) in dates.iter().zip(predictions).zip(next_returns) {
        if !(ret.abs() < 1.0) {
            return Err(Error::Data(format!("return {ret} on {date} is not in (-1, 1)")));
        }
        let position = mode.position(prediction);
        equity *= 1.0 + f64::from(position) * ret;
        entries.push(TradeEntry {
            date: date.clone(),
            prediction,
            position,
            ret,
            equity,
        });
    }
    Ok(TradeLog { entries })
}

/// Most negative `(equity - running peak) / running peak`; 0 for a path that never falls.
pub fn max_drawdown(equity: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for &e in equity {
        peak = peak.max(e);
        worst = worst.min(e / peak - 1.0);
    }
    worst
}

pub fn accuracy(predictions: &[u8], labels: &[u8]) -> f64 {
    if predictions.is_empty() {
        return 0.0;
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / predictions.len() as f64
}

/// F1 on class 1; 0 when there are no true positives (including the all-negative case).
pub fn f1_score(predictions: &[u8], labels: &[u8]) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (1, 1) => tp += 1,
            (1, _) => fp += 1,
            (_, 1) => fneg += 1,
            _ => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fneg) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub cum_equity: f64,
    pub cum_return: f64,
    pub max_drawdown: f64,
    pub accuracy: f64,
    pub f1: f64,
}

pub fn metrics(log: &TradeLog, labels: &[u8]) -> Result<Metrics> {
    if log.entries.is_empty() {
        return Err(Error::Validation("cannot score an empty trade log".into()));
    }
    if labels.len() != log.entries.len() {
        return Err(Error::Validation(format!(
            "{} labels for {} trades",
            labels.len(),
            log.entries.len()
        )));
    }
    let preds: Vec<u8> = log.entries.iter().map(|e| e.prediction).collect();
    Ok(Metrics {
        cum_equity: log.final_equity(),
        cum_return: log.entries.iter().map(|e| f64::from(e.position) * e.ret).sum(),
        max_drawdown: max_drawdown(&log.equity_path()),
        accuracy: accuracy(&preds, labels),
        f1: f1_score(&preds, labels),
    })
}

/// Panel-level inputs shared by every fold and cell.
#[derive(Debug, Clone)]
pub struct BacktestContext<'a> {
    pub panel: &'a ReturnPanel,
    /// `labels[t]` for `t < panel.len() - horizon`.
    pub labels: Vec<u8>,
    pub horizon: usize,
    pub mode: TradeMode,
}

impl<'a> BacktestContext<'a> {
    pub fn new(panel: &'a ReturnPanel, horizon: usize, mode: TradeMode) -> Result<Self> {
        Ok(Self {
            panel,
            labels: label_updown(&panel.index_returns, horizon)?,
            horizon,
            mode,
        })
    }

    fn dataset(&self, store: &FeatureStore, combo: ComboCode, dates: impl Iterator<Item = usize>) -> Result<Dataset> {
        let layout: Vec<String> = store.config.layout(combo).iter().map(ToString::to_string).collect();
        let mut ds = Dataset::empty(combo.value(), layout);
        for t in dates {
            let Some(blocks) = store.get(t) else { continue };
            ds.dates.push(self.panel.dates[t].clone());
            ds.features.push(blocks.assemble(combo).values);
            ds.labels.push(self.labels[t]);
        }
        ds.validate()?;
        Ok(ds)
    }

    /// Rows whose features exist and whose label is resolved inside the
    /// training range (so no predict-period return leaks into training).
    pub fn training_set(&self, fold: &RollingFold, store: &FeatureStore, combo: ComboCode) -> Result<Dataset> {
        let end = fold.train.end.min(self.labels.len() + self.horizon);
        let last = end.saturating_sub(self.horizon);
        self.dataset(store, combo, fold.train.start..last.max(fold.train.start))
    }

    /// Labelled dates of the predict range that have features.
    pub fn predict_set(&self, fold: &RollingFold, store: &FeatureStore, combo: ComboCode) -> Result<Dataset> {
        let end = fold.predict.end.min(self.labels.len());
        self.dataset(store, combo, fold.predict.start..end.max(fold.predict.start))
    }

    /// Fits on the fold's training rows and predicts its labelled predict dates.
    /// Returns `None` (with a warning) when the fold lacks history.
    pub fn run_fold(
        &self,
        fold: &RollingFold,
        store: &FeatureStore,
        combo: ComboCode,
        spec: &ClassifierSpec,
    ) -> Result<Option<FoldPredictions>> {
        let train = self.training_set(fold, store, combo)?;
        let labelled = fold.predict.start..fold.predict.end.min(self.labels.len());
        let test = self.predict_set(fold, store, combo)?;
        if train.is_empty() || test.len() < labelled.len() {
            log::warn!(
                "skipping fold {} for {} cloud: insufficient history ({} training rows, {}/{} predict dates with features)",
                fold.predict_month,
                store.kind,
                train.len(),
                test.len(),
                labelled.len()
            );
            return Ok(None);
        }
        let model = fit(spec, &train)?;
        let preds = model.predict(&test.features)?;
        let next_returns = labelled.clone().map(|t| self.panel.index_returns[t + 1]).collect();
        Ok(Some(FoldPredictions {
            dates: test.dates,
            predictions: preds.iter().map(|p| p.label).collect(),
            scores: preds.iter().map(|p| p.score).collect(),
            labels: test.labels,
            next_returns,
        }))
    }

    /// Runs every fold for one cell and scores the pooled predictions.
    pub fn run_cell(
        &self,
        folds: &[RollingFold],
        store: &FeatureStore,
        combo: ComboCode,
        spec: &ClassifierSpec,
    ) -> Result<CellOutcome> {
        let mut pooled = FoldPredictions::default();
        let mut skipped = 0;
        for fold in folds {
            match self.run_fold(fold, store, combo, spec)? {
                Some(p) => pooled.extend(p),
                None => skipped += 1,
            }
        }
        if pooled.dates.is_empty() {
            return Err(Error::InsufficientHistory(format!(
                "none of the {} folds had enough history",
                folds.len()
            )));
        }
        let log = simulate(&pooled.dates, &pooled.predictions, &pooled.next_returns, self.mode)?;
        let metrics = metrics(&log, &pooled.labels)?;
        Ok(CellOutcome {
            metrics,
            log,
            folds_run: folds.len() - skipped,
            folds_skipped: skipped,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FoldPredictions {
    pub dates: Vec<String>,
    pub predictions: Vec<u8>,
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
    pub next_returns: Vec<f64>,
}

impl FoldPredictions {
    fn extend(&mut self, other: FoldPredictions) {
        self.dates.extend(other.dates);
        self.predictions.extend(other.predictions);
        self.scores.extend(other.scores);
        self.labels.extend(other.labels);
        self.next_returns.extend(other.next_returns);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub metrics: Metrics,
    pub log: TradeLog,
    pub folds_run: usize,
    pub folds_skipped: usize,
}

/// One sweep row; `outcome` holds the error message for a failed cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cloud: CloudKind,
    pub combo: ComboCode,
    pub model: ModelKind,
    pub outcome: std::result::Result<CellOutcome, String>,
}

impl CellResult {
    pub fn report(&self) -> BacktestReport {
        BacktestReport {
            cloud_type: self.cloud.name().into(),
            combo: self.combo.value(),
            model: self.model.name().into(),
            metrics: self.outcome.as_ref().ok().map(|o| o.metrics),
            error: self.outcome.as_ref().err().cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub cloud_type: String,
    pub combo: u8,
    pub model: String,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}

/// Everything a sweep needs, loaded once.
#[derive(Debug, Clone)]
pub struct SweepInputs {
    pub panel: ReturnPanel,
    pub folds: Vec<RollingFold>,
}

impl SweepInputs {
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        let panel = load_panel(cfg)?;
        Self::from_panel(panel, cfg)
    }

    pub fn from_panel(panel: ReturnPanel, cfg: &PipelineConfig) -> Result<Self> {
        let folds = make_folds(&panel.dates, &cfg.backtest.train_end, &cfg.backtest.predict_end)?;
        Ok(Self { panel, folds })
    }

    /// Date indices whose features any fold may use.
    pub fn feature_range(&self, kind: CloudKind, cfg: &PipelineConfig) -> std::ops::Range<usize> {
        let end = self.folds.last().map_or(0, |f| f.predict.end);
        first_buildable(kind, cfg).min(end)..end
    }
}

/// Thread pool with `jobs` workers (0 = available parallelism).
pub fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

/// Runs cloud × combo × model cells; failed cells become errored rows.
/// Rows are ordered by (cloud, combo, model) as listed in the config.
pub fn sweep(inputs: &SweepInputs, cfg: &PipelineConfig) -> Result<Vec<CellResult>> {
    let clouds = cfg.backtest.clouds()?;
    cfg.check_cloud_inputs(&clouds)?;
    let combos = cfg.backtest.combos()?;
    let models = cfg.models.kinds()?;
    let ctx = BacktestContext::new(&inputs.panel, cfg.backtest.label_horizon, cfg.backtest.trade_mode()?)?;
    let pool = worker_pool(cfg.run.jobs)?;
    pool.install(|| {
        let stores: Vec<std::result::Result<FeatureStore, String>> = clouds
            .iter()
            .map(|&kind| {
                log::info!("computing {kind} features");
                FeatureStore::compute(&inputs.panel, kind, inputs.feature_range(kind, cfg), cfg).map_err(|e| e.to_string())
            })
            .collect();
        let mut cells: Vec<(usize, ComboCode, ModelKind)> = Vec::new();
        for c in 0..clouds.len() {
            for &combo in &combos {
                cells.extend(models.iter().map(|&m| (c, combo, m)));
            }
        }
        Ok(cells
            .into_par_iter()
            .map(|(c, combo, model)| {
                let cloud = clouds[c];
                let outcome = match &stores[c] {
                    Err(e) => Err(format!("feature computation failed: {e}")),
                    Ok(store) => ctx
                        .run_cell(&inputs.folds, store, combo, &cfg.classifier(cloud, combo, model))
                        .map_err(|e| e.to_string()),
                };
                if let Err(e) = &outcome {
                    log::warn!("cell {cloud}/{combo}/{model} failed: {e}");
                }
                CellResult {
                    cloud,
                    combo,
                    model,
                    outcome,
                }
            })
            .collect())
    })
}

pub const REPORT_HEADER: [&str; 8] = [
    "cloud_type",
    "combo",
    "model",
    "cum_equity",
    "cum_return",
    "max_drawdown",
    "accuracy",
    "f1",
];

/// Report CSV; metric fields of errored rows are left empty.
pub fn write_report_csv<W: Write>(rows: &[BacktestReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Data(format!("writing report: {e}"));
    w.write_record(REPORT_HEADER).map_err(err)?;
    for r in rows {
        let mut rec = vec![r.cloud_type.clone(), r.combo.to_string(), r.model.clone()];
        match r.metrics {
            Some(m) => rec.extend(
                [m.cum_equity, m.cum_return, m.max_drawdown, m.accuracy, m.f1]
                    .iter()
                    .map(|v| format!("{v:?}")),
            ),
            None => rec.extend(std::iter::repeat_n(String::new(), 5)),
        }
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Data(e.to_string()))
}

pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<BacktestReport>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Data(e.to_string()))?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: format!("expected header {}", REPORT_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let parse_err = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line,
            msg,
        };
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let combo: u8 = rec[1].parse().map_err(|_| parse_err(format!("bad combo {:?}", &rec[1])))?;
        let metrics = if rec[3].is_empty() {
            None
        } else {
            let v: Vec<f64> = (3..8)
                .map(|j| rec[j].parse::<f64>().map_err(|_| parse_err(format!("bad number {:?}", &rec[j]))))
                .collect::<Result<_>>()?;
            Some(Metrics {
                cum_equity: v[0],
                cum_return: v[1],
                max_drawdown: v[2],
                accuracy: v[3],
                f1: v[4],
            })
        };
        rows.push(BacktestReport {
            cloud_type: rec[0].to_string(),
            combo,
            model: rec[2].to_string(),
            error: metrics.is_none().then(|| "failed".to_string()),
            metrics,
        });
    }
    Ok(rows)
}

/// Markdown tables, one per cloud type, in row order.
pub fn write_report_markdown<W: Write>(rows: &[BacktestReport], mut out: W) -> Result<()> {
    let mut text = String::from("# Backtest report\n");
    let mut current: Option<&str> = None;
    for r in rows {
        if current != Some(r.cloud_type.as_str()) {
            current = Some(&r.cloud_type);
            text.push_str(&format!(
                "\n## {} cloud\n\n| Features | Code | Model | Cum. Equity | Cum. Return | Max Drawdown | Accuracy | F1 |\n|---|---:|---|---:|---:|---:|---:|---:|\n",
                r.cloud_type
            ));
        }
        let bits = ComboCode::new(r.combo).map(|c| c.binary()).unwrap_or_else(|_| "?".into());
        match (&r.metrics, &r.error) {
            (Some(m), _) => text.push_str(&format!(
                "| {bits} | {} | {} | {:.4} | {:.4} | {:.2}% | {:.4} | {:.4} |\n",
                r.combo,
                r.model,
                m.cum_equity,
                m.cum_return,
                100.0 * m.max_drawdown,
                m.accuracy,
                m.f1
            )),
            (None, e) => text.push_str(&format!(
                "| {bits} | {} | {} | error: {} | | | | |\n",
                r.combo,
                r.model,
                e.as_deref().unwrap_or("failed").replace('|', "/")
            )),
        }
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::Data(format!("writing markdown report: {e}")))
}

pub fn equity_file_name(cloud: CloudKind, combo: ComboCode, model: ModelKind) -> String {
    format!("{}_{:02}_{}.csv", cloud.name(), combo.value(), model.name())
}

/// Writes `report.csv`, `report.md` and `equity/<cell>.csv` under `dir`.
pub fn write_sweep_outputs(results: &[CellResult], dir: &Path) -> Result<Vec<PathBuf>> {
    let equity_dir = dir.join("equity");
    fs::create_dir_all(&equity_dir).map_err(|e| Error::io(&equity_dir, e))?;
    let rows: Vec<BacktestReport> = results.iter().map(CellResult::report).collect();
    let csv_path = dir.join("report.csv");
    write_report_csv(&rows, fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?)?;
    let md_path = dir.join("report.md");
    write_report_markdown(&rows, fs::File::create(&md_path).map_err(|e| Error::io(&md_path, e))?)?;
    let mut written = vec![csv_path, md_path];
    for r in results {
        if let Ok(o) = &r.outcome {
            let p = equity_dir.join(equity_file_name(r.cloud, r.combo, r.model));
            o.log.write_csv(fs::File::create(&p).map_err(|e| Error::io(&p, e))?)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Train rows up to `train_end` and predict rows in `(train_end, predict_end]`
/// for external classifiers. An empty predict window yields an empty test set.
pub fn export_datasets(
    ctx: &BacktestContext<'_>,
    store: &FeatureStore,
    combo: ComboCode,
    train_end: &str,
    predict_end: &str,
) -> Result<(Dataset, Dataset)> {
    let dates = &ctx.panel.dates;
    let start = dates.partition_point(|d| on_or_before(d, train_end));
    let end = dates.partition_point(|d| on_or_before(d, predict_end)).max(start);
    let span = RollingFold {
        train: 0..start,
        predict: start..end,
        predict_month: String::new(),
    };
    Ok((ctx.training_set(&span, store, combo)?, ctx.predict_set(&span, store, combo)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dates(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("2020-01-{:02}", i + 1)).collect()
    }

    #[test]
    fn long_short_compounding() {
        let log = simulate(&dates(2), &[1, 1], &[0.1, -0.1], TradeMode::LongShort).unwrap();
        assert!((log.final_equity() - 0.99).abs() < 1e-15);
        let log = simulate(&dates(1), &[0], &[-0.1], TradeMode::LongShort).unwrap();
        assert!((log.final_equity() - 1.1).abs() < 1e-15);
    }

    #[test]
    fn long_flat_all_zero_is_flat() {
        let log = simulate(&dates(3), &[0, 0, 0], &[0.2, -0.3, 0.05], TradeMode::LongFlat).unwrap();
        assert!(log.entries.iter().all(|e| e.equity == 1.0 && e.position == 0));
    }

    #[test]
    fn huge_return_rejected() {
        assert!(simulate(&dates(1), &[1], &[-1.0], TradeMode::LongShort).is_err());
    }

    #[test]
    fn drawdown_and_classification_metrics() {
        assert_eq!(max_drawdown(&[1.0, 1.2, 0.9, 1.05]), -0.25);
        assert_eq!(max_drawdown(&[1.0, 1.1, 1.2]), 0.0);
        assert_eq!(accuracy(&[1, 1], &[1, 0]), 0.5);
        assert!((f1_score(&[1, 1, 0], &[1, 0, 0]) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(f1_score(&[0, 0], &[0, 0]), 0.0);
    }

    #[test]
    fn metrics_from_log() {
        let log = simulate(&dates(3), &[1, 0, 1], &[0.1, 0.05, -0.02], TradeMode::LongShort).unwrap();
        let m = metrics(&log, &[1, 0, 0]).unwrap();
        assert!((m.cum_return - (0.1 - 0.05 - 0.02)).abs() < 1e-15);
        assert!((m.cum_equity - 1.1 * 0.95 * 0.98).abs() < 1e-15);
        assert!(m.cum_equity.ln() <= m.cum_return);
        assert!(metrics(&TradeLog::default(), &[]).is_err());
    }

    #[test]
    fn report_round_trip() {
        let rows = vec![
            BacktestReport {
                cloud_type: "takens".into(),
                combo: 9,
                model: "logistic".into(),
                metrics: Some(Metrics {
                    cum_equity: 1.25,
                    cum_return: 0.3,
                    max_drawdown: -0.1,
                    accuracy: 0.55,
                    f1: 0.5,
                }),
                error: None,
            },
            BacktestReport {
                cloud_type: "factor".into(),
                combo: 15,
                model: "gb_stumps".into(),
                metrics: None,
                error: Some("boom".into()),
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_report_csv(&rows, fs::File::create(&p).unwrap()).unwrap();
        let back = read_report_csv(&p).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].metrics.is_none());
        let mut md = Vec::new();
        write_report_markdown(&rows, &mut md).unwrap();
        let md = String::from_utf8(md).unwrap();
        assert!(md.contains("| 1001 | 9 | logistic | 1.2500 |"));
        assert!(md.contains("error: boom"));
    }
}
