//! Seeded synthetic market for demos and end-to-end tests.
//!
//! Constituent returns follow a one-market, four-sector factor model with a
//! slowly varying volatility; the index return is the equal-weighted mean of
//! the constituents. Factor exposures are trailing statistics of each
//! ticker's own returns, so they never look ahead.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};

pub const SYNTHETIC_FACTORS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Trading days with a return (the price file has one more row).
    pub days: usize,
    pub tickers: usize,
    pub start: NaiveDate,
    pub seed: u64,
    /// Months at the end of the sample used for walk-forward prediction.
    pub predict_months: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            days: 1040,
            tickers: 20,
            start: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            seed: 7,
            predict_months: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket {
    /// `days + 1` dates; the first carries only a close.
    pub dates: Vec<String>,
    pub closes: Vec<f64>,
    pub tickers: Vec<String>,
    /// `returns[t][i]` on `dates[t + 1]`.
    pub returns: Vec<Vec<f64>>,
    /// `factors[t][i][k]` on `dates[t + 1]`.
    pub factors: Vec<Vec<Vec<f64>>>,
}

/// Monday–Friday dates starting at (or after) `start`.
pub fn business_days(start: NaiveDate, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d.format("%Y-%m-%d").to_string());
        }
        d += Duration::days(1);
    }
    out
}

fn trailing_sum(series: &[f64], end: usize, len: usize) -> f64 {
    series[end + 1 - len.min(end + 1)..=end].iter().sum()
}

fn trailing_std(series: &[f64], end: usize, len: usize) -> f64 {
    let w = &series[end + 1 - len.min(end + 1)..=end];
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt()
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticMarket> {
    if spec.days < 2 || spec.tickers < 2 {
        return Err(Error::Config("synthetic market needs at least 2 days and 2 tickers".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let sectors = 4;
    let betas: Vec<f64> = (0..spec.tickers).map(|_| rng.random_range(0.6..1.4)).collect();
    let idio: Vec<f64> = (0..spec.tickers).map(|_| rng.random_range(0.006..0.015)).collect();

    let mut returns = Vec::with_capacity(spec.days);
    for t in 0..spec.days {
        let phase = 2.0 * std::f64::consts::PI * t as f64 / 250.0;
        let vol = 0.01 * (1.0 + 0.5 * phase.sin());
        let market = 0.0003 + vol * std_normal.sample(&mut rng);
        let sector: Vec<f64> = (0..sectors).map(|_| 0.006 * std_normal.sample(&mut rng)).collect();
        let row: Vec<f64> = (0..spec.tickers)
            .map(|i| {
                let r = betas[i] * market + sector[i % sectors] + idio[i] * std_normal.sample(&mut rng);
                r.clamp(-0.5, 0.5)
            })
            .collect();
        returns.push(row);
    }

    let mut factors = Vec::with_capacity(spec.days);
    let by_ticker: Vec<Vec<f64>> = (0..spec.tickers).map(|i| returns.iter().map(|r| r[i]).collect()).collect();
    for t in 0..spec.days {
        let row: Vec<Vec<f64>> = (0..spec.tickers)
            .map(|i| {
                let s = &by_ticker[i];
                vec![
                    trailing_sum(s, t, 5),
                    trailing_sum(s, t, 20),
                    trailing_sum(s, t, 60),
                    trailing_std(s, t, 20),
                    s[t],
                    betas[i] + 0.05 * std_normal.sample(&mut rng),
                ]
            })
            .collect();
        factors.push(row);
    }

    let mut closes = vec![100.0];
    for row in &returns {
        let idx = row.iter().sum::<f64>() / row.len() as f64;
        closes.push(closes.last().expect("seeded") * (1.0 + idx));
    }
    Ok(SyntheticMarket {
        dates: business_days(spec.start, spec.days + 1),
        closes,
        tickers: (0..spec.tickers).map(|i| format!("SYN{:02}", i + 1)).collect(),
        returns,
        factors,
    })
}

/// Paths of the files written by [`write_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFiles {
    pub prices: PathBuf,
    pub constituents: PathBuf,
    pub factors: PathBuf,
    pub config: PathBuf,
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    Ok(std::io::BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

/// Writes the three data files and a `config.toml` that sweeps them.
pub fn write_dataset(spec: &SyntheticSpec, dir: &Path) -> Result<SyntheticFiles> {
    let m = generate(spec)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = SyntheticFiles {
        prices: dir.join("prices.csv"),
        constituents: dir.join("constituents.csv"),
        factors: dir.join("factors.csv"),
        config: dir.join("config.toml"),
    };
    let wr = |path: &Path, e: std::io::Error| Error::io(path, e);

    let mut w = create(&files.prices)?;
    writeln!(w, "date,close").map_err(|e| wr(&files.prices, e))?;
    for (d, c) in m.dates.iter().zip(&m.closes) {
        writeln!(w, "{d},{c:?}").map_err(|e| wr(&files.prices, e))?;
    }
    w.flush().map_err(|e| wr(&files.prices, e))?;

    let mut w = create(&files.constituents)?;
    writeln!(w, "date,ticker,return").map_err(|e| wr(&files.constituents, e))?;
    for (t, row) in m.returns.iter().enumerate() {
        for (ticker, r) in m.tickers.iter().zip(row) {
            writeln!(w, "{},{ticker},{r:?}", m.dates[t + 1]).map_err(|e| wr(&files.constituents, e))?;
        }
    }
    w.flush().map_err(|e| wr(&files.constituents, e))?;

    let mut w = create(&files.factors)?;
    writeln!(w, "{}", crate::data::factors_header(SYNTHETIC_FACTORS).join(",")).map_err(|e| wr(&files.factors, e))?;
    for (t, row) in m.factors.iter().enumerate() {
        for (ticker, f) in m.tickers.iter().zip(row) {
            let vals: Vec<String> = f.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{},{ticker},{}", m.dates[t + 1], vals.join(",")).map_err(|e| wr(&files.factors, e))?;
        }
    }
    w.flush().map_err(|e| wr(&files.factors, e))?;

    let mut months: Vec<&str> = m.dates.iter().map(|d| crate::data::month_of(d)).collect();
    months.dedup();
    // the last month may be partial; predict the complete months before it
    if months.len() < spec.predict_months + 3 {
        return Err(Error::Config("synthetic sample too short for the requested predict window".into()));
    }
    let predict_end = months[months.len() - 2];
    let train_end = months[months.len() - 2 - spec.predict_months];

    let mut cfg = PipelineConfig::default();
    cfg.data.prices = "prices.csv".into();
    cfg.data.constituents = Some("constituents.csv".into());
    cfg.data.factors = Some("factors.csv".into());
    cfg.data.factor_count = SYNTHETIC_FACTORS;
    cfg.backtest.train_end = train_end.into();
    cfg.backtest.predict_end = predict_end.into();
    cfg.run.seed = spec.seed;
    cfg.run.output_dir = "out".into();
    let text = format!(
        "# Synthetic market: {} tickers, {} trading days, seed {}.\n{}",
        spec.tickers,
        spec.days,
        spec.seed,
        cfg.to_toml()?
    );
    fs::write(&files.config, text).map_err(|e| wr(&files.config, e))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn business_days_skip_weekends() {
        let d = business_days(NaiveDate::from_ymd_opt(2015, 1, 1).unwrap(), 3);
        assert_eq!(d, ["2015-01-01", "2015-01-02", "2015-01-05"]);
    }

    #[test]
    fn generator_is_seeded() {
        let spec = SyntheticSpec {
            days: 50,
            tickers: 4,
            ..Default::default()
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = generate(&SyntheticSpec { seed: 8, ..spec.clone() }).unwrap();
        assert_ne!(generate(&spec).unwrap().returns, other.returns);
    }

    #[test]
    fn written_dataset_loads() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec {
            days: 200,
            tickers: 5,
            predict_months: 2,
            ..Default::default()
        };
        let files = write_dataset(&spec, dir.path()).unwrap();
        let cfg = PipelineConfig::load(&files.config).unwrap();
        let panel = crate::pipeline::load_panel(&cfg).unwrap();
        assert_eq!(panel.len(), 200);
        assert_eq!(panel.tickers.len(), 5);
        let m = generate(&spec).unwrap();
        for t in [0, 100, 199] {
            let mean = m.returns[t].iter().sum::<f64>() / 5.0;
            assert!((panel.index_returns[t] - mean).abs() < 1e-12);
        }
    }
}
