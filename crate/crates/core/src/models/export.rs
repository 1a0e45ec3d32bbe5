use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::Dataset;
use crate::error::{Error, Result};

/// Writes `date,label,combo,f_0..f_{n-1}`, preceded by a `# layout:` line
/// naming each column.
pub fn write_feature_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    ds.validate()?;
    let mut out = std::io::BufWriter::new(out);
    let manifest: Vec<String> = ds.layout.iter().enumerate().map(|(i, s)| format!("f_{i}={s}")).collect();
    let write_err = |e: std::io::Error| Error::Data(format!("writing feature csv: {e}"));
    writeln!(out, "# layout: {}", manifest.join(";")).map_err(write_err)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date".to_string(), "label".into(), "combo".into()];
    header.extend((0..ds.width()).map(|i| format!("f_{i}")));
    w.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
    for ((date, label), row) in ds.dates.iter().zip(&ds.labels).zip(&ds.features) {
        let mut rec = vec![date.clone(), label.to_string(), ds.combo.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:?}")));
        w.write_record(&rec).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(write_err)
}

/// Writes `<stem>_train.csv` and `<stem>_test.csv` under `dir`; the two
/// datasets must share a layout.
pub fn export_features(train: &Dataset, test: &Dataset, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    if train.layout != test.layout {
        return Err(Error::LayoutMismatch {
            expected: train.width(),
            actual: test.width(),
        });
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = (dir.join(format!("{stem}_train.csv")), dir.join(format!("{stem}_test.csv")));
    for (ds, path) in [(train, &paths.0), (test, &paths.1)] {
        let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_feature_csv(ds, f)?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_manifest_and_header() {
        let ds = Dataset::new(
            vec!["2020-01-02".into()],
            vec![vec![0.5, 2.0]],
            vec![1],
            6,
            vec!["tp[h0]".into(), "tp[h1]".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_feature_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# layout: f_0=tp[h0];f_1=tp[h1]");
        assert_eq!(lines[1], "date,label,combo,f_0,f_1");
        assert_eq!(lines[2], "2020-01-02,1,6,0.5,2.0");
    }
}
