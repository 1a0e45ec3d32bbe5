//! Market data ingestion: CSV loaders, return computation, panel alignment,
//! rolling monthly folds and up/down labels.
//!
//! Dates are ISO-8601 `YYYY-MM-DD` strings. They are compared lexically and
//! grouped into months by their `YYYY-MM` prefix; no other calendar logic is
//! applied.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use crate::error::{Error, Result};

pub const PRICES_HEADER: &[&str] = &["date", "close"];
pub const CONSTITUENTS_HEADER: &[&str] = &["date", "ticker", "return"];

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<String>,
    closes: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<String>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::Validation(format!(
                "{} dates but {} closes",
                dates.len(),
                closes.len()
            )));
        }
        if dates.is_empty() {
            return Err(Error::Validation("no data rows".into()));
        }
        check_increasing(&dates)?;
        if let Some((d, c)) = dates
            .iter()
            .zip(&closes)
            .find(|(_, c)| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::Validation(format!("non-positive close {c} on {d}")));
        }
        Ok(Self { dates, closes })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Simple returns keyed by the date on which they are realized.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Vec<String>,
    pub values: Vec<f64>,
}

fn check_increasing(dates: &[String]) -> Result<()> {
    for w in dates.windows(2) {
        if w[1] == w[0] {
            return Err(Error::Validation(format!("duplicated date {}", w[1])));
        }
        if w[1] < w[0] {
            return Err(Error::Validation(format!(
                "dates not increasing: {} follows {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

fn check_date(path: &Path, line: usize, raw: &str) -> Result<String> {
    chrono::NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line,
        msg: format!("bad date {raw:?}: {e}"),
    })?;
    Ok(raw.to_string())
}

fn parse_real(path: &Path, line: usize, field: &str, raw: &str) -> Result<f64> {
    match raw.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(Error::Parse {
            path: path.display().to_string(),
            line,
            msg: format!("non-finite {field} {raw:?}"),
        }),
        Err(e) => Err(Error::Parse {
            path: path.display().to_string(),
            line,
            msg: format!("bad {field} {raw:?}: {e}"),
        }),
    }
}

/// Reads a CSV whose header must equal `expected` exactly and returns the data
/// records with their 1-based line numbers.
fn read_records(path: &Path, expected: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return Err(Error::Validation(format!("{}: empty file", path.display()))),
    };
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: format!(
                "header mismatch: expected `{}`, got `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != expected.len() {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line,
                msg: format!("expected {} fields, got {}", expected.len(), rec.len()),
            });
        }
        out.push((line, rec));
    }
    if out.is_empty() {
        return Err(Error::Validation(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.display().to_string(),
            line,
            msg: format!("{other:?}"),
        },
    }
}

/// Loads a `date,close` price file.
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let mut dates = Vec::new();
    let mut closes = Vec::new();
    for (line, rec) in read_records(path, PRICES_HEADER)? {
        dates.push(check_date(path, line, &rec[0])?);
        closes.push(parse_real(path, line, "close", &rec[1])?);
    }
    PriceSeries::new(dates, closes)
}

/// `r_t = close_t / close_{t-1} - 1`, dated at `t`.
pub fn to_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    let values = simple_returns(prices.closes())?;
    Ok(ReturnSeries {
        dates: prices.dates()[1..].to_vec(),
        values,
    })
}

pub fn simple_returns(closes: &[f64]) -> Result<Vec<f64>> {
    if closes.len() < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 prices for returns, got {}",
            closes.len()
        )));
    }
    Ok(closes.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstituentRow {
    pub date: String,
    pub ticker: String,
    pub ret: f64,
}

/// Loads a long-format `date,ticker,return` file.
pub fn load_constituents(path: impl AsRef<Path>) -> Result<Vec<ConstituentRow>> {
    let path = path.as_ref();
    read_records(path, CONSTITUENTS_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(ConstituentRow {
                date: check_date(path, line, &rec[0])?,
                ticker: rec[1].to_string(),
                ret: parse_real(path, line, "return", &rec[2])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorRow {
    pub date: String,
    pub ticker: String,
    pub values: Vec<f64>,
}

pub fn factors_header(factor_count: usize) -> Vec<String> {
    let mut h = vec!["date".to_string(), "ticker".to_string()];
    h.extend((1..=factor_count).map(|k| format!("f{k}")));
    h
}

/// Loads a `date,ticker,f1,…,fd` factor file with `d = factor_count`.
pub fn load_factors(path: impl AsRef<Path>, factor_count: usize) -> Result<Vec<FactorRow>> {
    let path = path.as_ref();
    if factor_count == 0 {
        return Err(Error::Config("factor_count must be at least 1".into()));
    }
    let header = factors_header(factor_count);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    read_records(path, &header)?
        .into_iter()
        .map(|(line, rec)| {
            let values = (2..rec.len())
                .map(|k| parse_real(path, line, &header[k], &rec[k]))
                .collect::<Result<Vec<_>>>()?;
            Ok(FactorRow {
                date: check_date(path, line, &rec[0])?,
                ticker: rec[1].to_string(),
                values,
            })
        })
        .collect()
}

/// Date-aligned index returns with optional constituent returns and factors.
///
/// `constituents[t][i]` is ticker `i`'s return on `dates[t]`;
/// `factors[t][i][k]` is factor `k` for ticker `i` on `dates[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub dates: Vec<String>,
    pub index_returns: Vec<f64>,
    pub tickers: Vec<String>,
    pub constituents: Option<Vec<Vec<f64>>>,
    pub factors: Option<Vec<Vec<Vec<f64>>>>,
}

impl ReturnPanel {
    pub fn index_only(series: ReturnSeries) -> Self {
        Self {
            dates: series.dates,
            index_returns: series.values,
            tickers: Vec::new(),
            constituents: None,
            factors: None,
        }
    }

    /// Aligns the blocks on a common date axis.
    ///
    /// The ticker set is the union of tickers seen in the constituent (or,
    /// failing that, factor) rows. A date is dropped when any block lacks a
    /// value for any ticker on it.
    pub fn assemble(
        index: ReturnSeries,
        constituents: Option<Vec<ConstituentRow>>,
        factors: Option<Vec<FactorRow>>,
    ) -> Result<Self> {
        let mut tickers = BTreeSet::new();
        if let Some(rows) = &constituents {
            tickers.extend(rows.iter().map(|r| r.ticker.clone()));
        } else if let Some(rows) = &factors {
            tickers.extend(rows.iter().map(|r| r.ticker.clone()));
        }
        let tickers: Vec<String> = tickers.into_iter().collect();
        let ticker_pos: BTreeMap<&str, usize> =
            tickers.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

        let cons_by_date = match &constituents {
            Some(rows) => {
                let mut m: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
                for r in rows {
                    let slot = &mut m.entry(r.date.as_str()).or_insert_with(|| vec![None; tickers.len()])
                        [ticker_pos[r.ticker.as_str()]];
                    if slot.is_some() {
                        return Err(Error::Validation(format!(
                            "duplicate constituent row {} {}",
                            r.date, r.ticker
                        )));
                    }
                    *slot = Some(r.ret);
                }
                Some(m)
            }
            None => None,
        };
        let fac_by_date = match &factors {
            Some(rows) => {
                let width = rows.first().map(|r| r.values.len()).unwrap_or(0);
                let mut m: BTreeMap<&str, Vec<Option<Vec<f64>>>> = BTreeMap::new();
                for r in rows {
                    let Some(&pos) = ticker_pos.get(r.ticker.as_str()) else {
                        // factor rows for tickers outside the constituent set are ignored
                        continue;
                    };
                    if r.values.len() != width {
                        return Err(Error::Validation(format!(
                            "factor row {} {} has {} values, expected {width}",
                            r.date,
                            r.ticker,
                            r.values.len()
                        )));
                    }
                    let slot = &mut m.entry(r.date.as_str()).or_insert_with(|| vec![None; tickers.len()])[pos];
                    if slot.is_some() {
                        return Err(Error::Validation(format!(
                            "duplicate factor row {} {}",
                            r.date, r.ticker
                        )));
                    }
                    *slot = Some(r.values.clone());
                }
                Some(m)
            }
            None => None,
        };

        let mut panel = ReturnPanel {
            dates: Vec::new(),
            index_returns: Vec::new(),
            tickers: tickers.clone(),
            constituents: cons_by_date.as_ref().map(|_| Vec::new()),
            factors: fac_by_date.as_ref().map(|_| Vec::new()),
        };
        let mut dropped = 0usize;
        for (date, r) in index.dates.iter().zip(&index.values) {
            let cons = match &cons_by_date {
                Some(m) => match m.get(date.as_str()).and_then(|row| row.iter().copied().collect::<Option<Vec<f64>>>()) {
                    Some(row) => Some(row),
                    None => {
                        dropped += 1;
                        continue;
                    }
                },
                None => None,
            };
            let facs = match &fac_by_date {
                Some(m) => match m.get(date.as_str()).and_then(|row| row.iter().cloned().collect::<Option<Vec<Vec<f64>>>>()) {
                    Some(row) => Some(row),
                    None => {
                        dropped += 1;
                        continue;
                    }
                },
                None => None,
            };
            panel.dates.push(date.clone());
            panel.index_returns.push(*r);
            if let (Some(dst), Some(row)) = (panel.constituents.as_mut(), cons) {
                dst.push(row);
            }
            if let (Some(dst), Some(row)) = (panel.factors.as_mut(), facs) {
                dst.push(row);
            }
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} dates with incomplete constituent or factor data");
        }
        if panel.dates.is_empty() {
            return Err(Error::Data("no dates left after alignment".into()));
        }
        Ok(panel)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn factor_count(&self) -> Option<usize> {
        self.factors
            .as_ref()
            .and_then(|f| f.first())
            .and_then(|row| row.first())
            .map(Vec::len)
    }

    pub fn position(&self, date: &str) -> Option<usize> {
        self.dates.binary_search_by(|d| d.as_str().cmp(date)).ok()
    }

    /// Copy of the panel restricted to dates `<= last`.
    pub fn truncate_through(&self, last: &str) -> Self {
        let keep = self.dates.partition_point(|d| d.as_str() <= last);
        Self {
            dates: self.dates[..keep].to_vec(),
            index_returns: self.index_returns[..keep].to_vec(),
            tickers: self.tickers.clone(),
            constituents: self.constituents.as_ref().map(|c| c[..keep].to_vec()),
            factors: self.factors.as_ref().map(|f| f[..keep].to_vec()),
        }
    }
}

/// `YYYY-MM` prefix of a date.
pub fn month_of(date: &str) -> &str {
    date.get(..7).unwrap_or(date)
}

/// Whether `date` falls at or before `bound`, where `bound` is either a full
/// date or a `YYYY-MM` month (inclusive of the whole month).
pub fn on_or_before(date: &str, bound: &str) -> bool {
    if bound.len() == 7 {
        month_of(date) <= bound
    } else {
        date <= bound
    }
}

/// One walk-forward step: fit on `train`, predict `predict`.
///
/// Ranges index into the date axis the folds were built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RollingFold {
    pub train: Range<usize>,
    pub predict: Range<usize>,
    pub predict_month: String,
}

/// Monthly walk-forward folds covering `(train_end, predict_end]`.
///
/// Every fold trains from the first date; fold `k+1`'s training range is fold
/// `k`'s training range plus fold `k`'s predict month.
pub fn make_folds(dates: &[String], train_end: &str, predict_end: &str) -> Result<Vec<RollingFold>> {
    let (Some(first), Some(last)) = (dates.first(), dates.last()) else {
        return Err(Error::Data("no dates to fold".into()));
    };
    let bound_key = |b: &str| if b.len() == 7 { format!("{b}-99") } else { b.to_string() };
    if bound_key(train_end) >= bound_key(predict_end) {
        return Err(Error::Config(format!(
            "train_end {train_end} must precede predict_end {predict_end}"
        )));
    }
    if !on_or_before(first, train_end) {
        return Err(Error::Config(format!(
            "train_end {train_end} precedes first date {first}"
        )));
    }
    if on_or_before(last, train_end) {
        return Err(Error::Config(format!(
            "train_end {train_end} is at or after last date {last}"
        )));
    }
    if bound_key(predict_end) > bound_key(last) && month_of(predict_end) > month_of(last) {
        return Err(Error::Config(format!(
            "predict_end {predict_end} is beyond last date {last}"
        )));
    }
    let start = dates.partition_point(|d| on_or_before(d, train_end));
    let end = dates.partition_point(|d| on_or_before(d, predict_end));
    if start >= end {
        return Err(Error::Config(format!(
            "empty predict window ({train_end}, {predict_end}]"
        )));
    }
    let mut folds = Vec::new();
    let mut i = start;
    while i < end {
        let month = month_of(&dates[i]);
        let mut j = i;
        while j < end && month_of(&dates[j]) == month {
            j += 1;
        }
        folds.push(RollingFold {
            train: 0..i,
            predict: i..j,
            predict_month: month.to_string(),
        });
        i = j;
    }
    Ok(folds)
}

/// `label_t = 1` iff the compounded return over `(t, t + horizon]` is
/// strictly positive. The last `horizon` dates get no label.
pub fn label_updown(returns: &[f64], horizon: usize) -> Result<Vec<u8>> {
    if horizon == 0 {
        return Err(Error::Config("label horizon must be at least 1".into()));
    }
    if returns.len() <= horizon {
        return Err(Error::Validation(format!(
            "need more than {horizon} returns to label, got {}",
            returns.len()
        )));
    }
    Ok((0..returns.len() - horizon)
        .map(|t| {
            let growth: f64 = returns[t + 1..=t + horizon].iter().map(|r| 1.0 + r).product();
            u8::from(growth - 1.0 > 0.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn loads_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "p.csv", "date,close\n2020-01-01,100\n2020-01-02,101\n2020-01-03,99\n");
        let s = load_prices(&p).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.closes(), &[100.0, 101.0, 99.0]);
    }

    #[test]
    fn duplicated_date_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "p.csv", "date,close\n2020-01-01,100\n2020-01-01,101\n");
        let err = load_prices(&p).unwrap_err().to_string();
        assert!(err.contains("2020-01-01"), "{err}");
    }

    #[test]
    fn header_only_has_no_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "p.csv", "date,close\n");
        let err = load_prices(&p).unwrap_err().to_string();
        assert!(err.contains("no data rows"), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "p.csv", "date,close\n2020-01-01,100\n2020-01-02,abc\n");
        match load_prices(&p).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn header_is_case_sensitive() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "p.csv", "Date,Close\n2020-01-01,100\n");
        assert!(matches!(load_prices(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn non_positive_and_decreasing_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "p.csv", "date,close\n2020-01-01,100\n2020-01-02,0\n");
        assert!(matches!(load_prices(&p), Err(Error::Validation(_))));
        let p = write(&dir, "q.csv", "date,close\n2020-01-02,100\n2020-01-01,1\n");
        assert!(matches!(load_prices(&p), Err(Error::Validation(_))));
    }

    #[test]
    fn returns_examples() {
        assert_eq!(simple_returns(&[100.0, 110.0]).unwrap()[0], 110.0 / 100.0 - 1.0);
        assert_eq!(simple_returns(&[100.0, 100.0, 100.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(simple_returns(&[100.0, 50.0, 100.0]).unwrap(), vec![-0.5, 1.0]);
        assert!(simple_returns(&[1.0]).is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(label_updown(&[0.01, -0.02, 0.03], 1).unwrap(), vec![0, 1]);
        assert_eq!(label_updown(&[0.01, 0.0], 1).unwrap(), vec![0]);
        assert!(label_updown(&[0.01], 1).is_err());
    }

    fn month_dates(from: (i32, u32), to: (i32, u32)) -> Vec<String> {
        let mut out = Vec::new();
        let (mut y, mut m) = from;
        while (y, m) <= to {
            for d in [3, 10, 17] {
                out.push(format!("{y:04}-{m:02}-{d:02}"));
            }
            m += 1;
            if m == 13 {
                m = 1;
                y += 1;
            }
        }
        out
    }

    #[test]
    fn folds_follow_monthly_schedule() {
        let dates = month_dates((2015, 1), (2018, 3));
        let folds = make_folds(&dates, "2017-12", "2018-03").unwrap();
        assert_eq!(folds.len(), 3);
        let months: Vec<&str> = folds.iter().map(|f| f.predict_month.as_str()).collect();
        assert_eq!(months, ["2018-01", "2018-02", "2018-03"]);
        assert_eq!(dates[folds[0].train.end - 1], "2017-12-17");
        assert_eq!(folds[0].train.start, 0);
        for w in folds.windows(2) {
            assert_eq!(w[1].train.end, w[0].predict.end);
            assert_eq!(w[0].train.end, w[0].predict.start);
        }
        assert_eq!(make_folds(&dates, "2017-12", "2018-01").unwrap().len(), 1);
        assert!(make_folds(&dates, "2018-04", "2018-05").is_err());
        assert!(make_folds(&dates, "2018-02", "2018-01").is_err());
    }

    #[test]
    fn assemble_drops_incomplete_dates() {
        let idx = ReturnSeries {
            dates: vec!["2020-01-01".into(), "2020-01-02".into(), "2020-01-03".into()],
            values: vec![0.01, 0.02, 0.03],
        };
        let row = |d: &str, t: &str, r: f64| ConstituentRow { date: d.into(), ticker: t.into(), ret: r };
        let cons = vec![
            row("2020-01-01", "A", 0.1),
            row("2020-01-01", "B", 0.2),
            row("2020-01-02", "A", 0.3),
            row("2020-01-03", "A", 0.4),
            row("2020-01-03", "B", 0.5),
        ];
        let p = ReturnPanel::assemble(idx, Some(cons), None).unwrap();
        assert_eq!(p.dates, vec!["2020-01-01", "2020-01-03"]);
        assert_eq!(p.constituents.unwrap()[1], vec![0.4, 0.5]);
    }
}
