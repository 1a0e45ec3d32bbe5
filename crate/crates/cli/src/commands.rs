use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use topoindex::backtest::{
    equity_file_name, export_datasets, read_report_csv, sweep, write_report_markdown, write_sweep_outputs,
    BacktestContext, SweepInputs,
};
use topoindex::data::on_or_before;
use topoindex::features::{ComboCode, FeatureBlocks, FeatureConfig};
use topoindex::models::{export_features, ModelKind};
use topoindex::pipeline::{build_cloud, diagram_for, first_buildable, load_panel, FeatureStore};
use topoindex::pointcloud::CloudKind;
use topoindex::synthetic::{write_dataset, SyntheticSpec};
use topoindex::{Error, PersistenceDiagram, PipelineConfig, PointCloud, Result};

use crate::{Cli, Command};

fn apply_overrides(cli: &Cli, cfg: &mut PipelineConfig) {
    if let Some(dir) = &cli.output_dir {
        cfg.run.output_dir = dir.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.run.jobs = jobs;
    }
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
}

fn load_config(cli: &Cli) -> Result<Option<PipelineConfig>> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let mut cfg = PipelineConfig::load(path)?;
    apply_overrides(cli, &mut cfg);
    Ok(Some(cfg))
}

fn require_config(cli: &Cli) -> Result<PipelineConfig> {
    load_config(cli)?.ok_or_else(|| Error::Config("this command needs --config <FILE>".into()))
}

fn write_out(out: Option<&Path>, text: &[u8]) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::Io {
                    path: parent.display().to_string(),
                    source: e,
                })?;
            }
            fs::write(p, text).map_err(|e| Error::Io {
                path: p.display().to_string(),
                source: e,
            })
        }
        None => std::io::stdout().write_all(text).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn store_through(cfg: &PipelineConfig, panel: &topoindex::data::ReturnPanel, kind: CloudKind, end: usize) -> Result<FeatureStore> {
    FeatureStore::compute(panel, kind, first_buildable(kind, cfg).min(end)..end, cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Cloud { method, date, out } => {
            let cfg = require_config(cli)?;
            let kind: CloudKind = method.parse()?;
            cfg.check_cloud_inputs(&[kind])?;
            let panel = load_panel(&cfg)?;
            let t = panel
                .position(date)
                .ok_or_else(|| Error::Data(format!("date {date} is not a trading date in the data")))?;
            let cloud = build_cloud(&panel, kind, t, &cfg)?;
            let path = out
                .clone()
                .unwrap_or_else(|| cfg.run.output_dir.join(format!("cloud_{}_{date}.csv", kind.name())));
            let mut buf = Vec::new();
            cloud.write_csv(&mut buf).map_err(|e| Error::Data(e.to_string()))?;
            write_out(Some(&path), &buf)?;
            println!("{} points in R^{} -> {}", cloud.len(), cloud.dim(), path.display());
        }
        Command::Persist { cloud_file, out } => {
            let cfg = load_config(cli)?.unwrap_or_default();
            let cloud = PointCloud::load_csv(cloud_file)?;
            let diagram = diagram_for(&cloud, &cfg)?;
            let mut buf = Vec::new();
            diagram.write_csv(&mut buf).map_err(|e| Error::Data(e.to_string()))?;
            write_out(out.as_deref(), &buf)?;
        }
        Command::Features { diagram_file, combo, out } => {
            let combo = ComboCode::new(*combo).map_err(|e| Error::Config(e.to_string()))?;
            let diagram = PersistenceDiagram::load_csv(diagram_file)?;
            let fc = match load_config(cli)? {
                Some(cfg) => cfg.feature_config()?,
                None => FeatureConfig::default(),
            };
            let fc = FeatureConfig {
                max_dim: diagram.max_dim(),
                ..fc
            };
            fc.validate()?;
            let v = FeatureBlocks::compute(&diagram, &fc).assemble(combo);
            let mut text = String::from("slot,value\n");
            for (slot, value) in v.layout.iter().zip(&v.values) {
                text.push_str(&format!("{slot},{value:?}\n"));
            }
            write_out(out.as_deref(), text.as_bytes())?;
        }
        Command::Export { cloud, combo } => {
            let cfg = require_config(cli)?;
            let kind: CloudKind = cloud.parse()?;
            let combo = ComboCode::new(*combo).map_err(|e| Error::Config(e.to_string()))?;
            cfg.check_cloud_inputs(&[kind])?;
            let panel = load_panel(&cfg)?;
            let end = panel.dates.partition_point(|d| on_or_before(d, &cfg.backtest.predict_end));
            let store = store_through(&cfg, &panel, kind, end)?;
            let ctx = BacktestContext::new(&panel, cfg.backtest.label_horizon, cfg.backtest.trade_mode()?)?;
            let (train, test) = export_datasets(&ctx, &store, combo, &cfg.backtest.train_end, &cfg.backtest.predict_end)?;
            let dir = cfg.run.output_dir.join("export");
            let (a, b) = export_features(&train, &test, &dir, &format!("{}_{:02}", kind.name(), combo.value()))?;
            println!("{} train rows -> {}", train.len(), a.display());
            println!("{} test rows -> {}", test.len(), b.display());
        }
        Command::Backtest { cloud, combo, model } => {
            let cfg = require_config(cli)?;
            let kind: CloudKind = cloud.parse()?;
            let combo = ComboCode::new(*combo).map_err(|e| Error::Config(e.to_string()))?;
            let model: ModelKind = model.parse()?;
            cfg.check_cloud_inputs(&[kind])?;
            let inputs = SweepInputs::load(&cfg)?;
            let pool = topoindex::backtest::worker_pool(cfg.run.jobs)?;
            let store = pool.install(|| FeatureStore::compute(&inputs.panel, kind, inputs.feature_range(kind, &cfg), &cfg))?;
            let ctx = BacktestContext::new(&inputs.panel, cfg.backtest.label_horizon, cfg.backtest.trade_mode()?)?;
            let outcome = ctx.run_cell(&inputs.folds, &store, combo, &cfg.classifier(kind, combo, model))?;
            let path = cfg.run.output_dir.join("equity").join(equity_file_name(kind, combo, model));
            let mut buf = Vec::new();
            outcome.log.write_csv(&mut buf)?;
            write_out(Some(&path), &buf)?;
            let m = outcome.metrics;
            println!(
                "{kind} combo {combo} {model}: cum_equity={:.4} cum_return={:.4} max_drawdown={:.4} accuracy={:.4} f1={:.4} ({} folds, {} skipped)",
                m.cum_equity, m.cum_return, m.max_drawdown, m.accuracy, m.f1, outcome.folds_run, outcome.folds_skipped
            );
            println!("equity curve -> {}", path.display());
        }
        Command::Sweep { combos, clouds, models } => {
            let mut cfg = require_config(cli)?;
            if let Some(c) = combos {
                cfg.backtest.combos = c.clone();
            }
            if let Some(c) = clouds {
                cfg.backtest.clouds = c.clone();
            }
            if let Some(m) = models {
                cfg.models.kinds = m.clone();
            }
            cfg.validate()?;
            let inputs = SweepInputs::load(&cfg)?;
            let results = sweep(&inputs, &cfg)?;
            let written = write_sweep_outputs(&results, &cfg.run.output_dir)?;
            let failed = results.iter().filter(|r| r.outcome.is_err()).count();
            println!(
                "{} cells ({} failed) over {} folds -> {}",
                results.len(),
                failed,
                inputs.folds.len(),
                written[0].display()
            );
        }
        Command::Report { input, out } => {
            let dir = match load_config(cli)? {
                Some(cfg) => cfg.run.output_dir,
                None => cli.output_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            };
            let input = input.clone().unwrap_or_else(|| dir.join("report.csv"));
            let rows = read_report_csv(&input)?;
            let mut buf = Vec::new();
            write_report_markdown(&rows, &mut buf)?;
            write_out(out.as_deref(), &buf)?;
        }
        Command::Synth {
            dir,
            days,
            tickers,
            predict_months,
        } => {
            let spec = SyntheticSpec {
                days: *days,
                tickers: *tickers,
                predict_months: *predict_months,
                seed: cli.seed.unwrap_or(SyntheticSpec::default().seed),
                ..Default::default()
            };
            let files = write_dataset(&spec, dir)?;
            println!("config -> {}", files.config.display());
        }
        Command::DumpConfig { out } => {
            let cfg = match load_config(cli)? {
                Some(c) => c,
                None => {
                    let mut c = PipelineConfig::default();
                    apply_overrides(cli, &mut c);
                    c
                }
            };
            write_out(out.as_deref(), cfg.to_toml()?.as_bytes())?;
        }
    }
    Ok(())
}
