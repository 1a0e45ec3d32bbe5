//! Point-cloud constructions: delay embedding of the index return series,
//! constituent correlation geometry via classical MDS, and constituent
//! factor geometry via Gaussian kernel PCA.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SquareMatrix};
use crate::scalar::{euclidean, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CloudKind {
    Takens,
    Correlation,
    Factor,
}

impl CloudKind {
    pub const ALL: [CloudKind; 3] = [CloudKind::Takens, CloudKind::Correlation, CloudKind::Factor];

    pub fn name(self) -> &'static str {
        match self {
            CloudKind::Takens => "takens",
            CloudKind::Correlation => "correlation",
            CloudKind::Factor => "factor",
        }
    }
}

impl fmt::Display for CloudKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CloudKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "takens" => Ok(CloudKind::Takens),
            "correlation" | "corr" => Ok(CloudKind::Correlation),
            "factor" => Ok(CloudKind::Factor),
            other => Err(Error::Config(format!(
                "unknown cloud method {other:?} (expected takens, correlation or factor)"
            ))),
        }
    }
}

/// Ordered points of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Vec<T>>,
    dim: usize,
    pub kind: Option<CloudKind>,
    pub target_date: Option<String>,
    pub params: String,
}

impl<T: Scalar> PointCloud<T> {
    /// Validates uniform dimension and finite coordinates.
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Validation(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("point {i} has a non-finite coordinate")));
            }
        }
        if !points.is_empty() && dim == 0 {
            return Err(Error::Validation("points must have dimension at least 1".into()));
        }
        if !points.is_empty() && points.len() <= dim {
            log::warn!(
                "cloud has {} points in R^{dim}; homology above dimension 0 will be thin",
                points.len()
            );
        }
        Ok(Self {
            points,
            dim,
            kind: None,
            target_date: None,
            params: String::new(),
        })
    }

    pub fn with_provenance(mut self, kind: CloudKind, date: impl Into<String>, params: impl Into<String>) -> Self {
        self.kind = Some(kind);
        self.target_date = Some(date.into());
        self.params = params.into();
        self
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Full pairwise Euclidean distance matrix.
    pub fn distance_matrix(&self) -> SquareMatrix<T> {
        let n = self.len();
        let mut d = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = euclidean(&self.points[i], &self.points[j]);
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        d
    }

    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                best = best.max(euclidean(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// Writes `# kind=… date=… params=…` followed by `point_index,c1,…,cd`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# kind={} date={} params={}",
            self.kind.map(CloudKind::name).unwrap_or("none"),
            self.target_date.as_deref().unwrap_or("none"),
            if self.params.is_empty() { "none" } else { &self.params }
        )?;
        let mut header = String::from("point_index");
        for k in 1..=self.dim {
            header.push_str(&format!(",c{k}"));
        }
        writeln!(out, "{header}")?;
        for (i, p) in self.points.iter().enumerate() {
            write!(out, "{i}")?;
            for x in p {
                write!(out, ",{x}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Reads the dump format back. The `#` metadata line is optional.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: path.display().to_string(),
            line,
            msg,
        };
        let mut meta = None;
        let mut header_seen = false;
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            if let Some(m) = raw.strip_prefix('#') {
                meta = Some(m.trim().to_string());
                continue;
            }
            let fields: Vec<&str> = raw.split(',').collect();
            if !header_seen {
                if fields.first() != Some(&"point_index") {
                    return Err(parse_err(line, "expected header `point_index,c1,…`".into()));
                }
                header_seen = true;
                continue;
            }
            let coords = fields[1..]
                .iter()
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map(T::lit)
                        .map_err(|e| parse_err(line, format!("bad coordinate {f:?}: {e}")))
                })
                .collect::<Result<Vec<T>>>()?;
            points.push(coords);
        }
        if points.is_empty() {
            return Err(Error::Validation(format!("{}: cloud has no points", path.display())));
        }
        let mut cloud = Self::new(points)?;
        if let Some(meta) = meta {
            for tok in meta.split_whitespace() {
                match tok.split_once('=') {
                    Some(("kind", v)) => cloud.kind = v.parse().ok(),
                    Some(("date", v)) if v != "none" => cloud.target_date = Some(v.to_string()),
                    Some(("params", v)) if v != "none" => cloud.params = v.to_string(),
                    _ => {}
                }
            }
        }
        Ok(cloud)
    }
}

/// Strictly increasing delay offsets starting at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagSet(Vec<usize>);

impl LagSet {
    pub fn new(lags: Vec<usize>) -> Result<Self> {
        if lags.first() != Some(&0) {
            return Err(Error::Config(format!("lag set must start at 0, got {lags:?}")));
        }
        if lags.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("lags must be strictly increasing, got {lags:?}")));
        }
        Ok(Self(lags))
    }

    pub fn lags(&self) -> &[usize] {
        &self.0
    }

    pub fn max_lag(&self) -> usize {
        *self.0.last().expect("non-empty by construction")
    }
}

impl Default for LagSet {
    /// Daily, weekly, monthly and quarterly offsets.
    fn default() -> Self {
        Self(vec![0, 5, 20, 60])
    }
}

/// Delay embedding: point `k` is `(x[k + lags[0]], …, x[k + lags[p-1]])`,
/// for `k = 0 … N - 1 - max_lag`.
pub fn takens_embed<T: Scalar>(series: &[T], lags: &LagSet) -> Result<PointCloud<T>> {
    let n = series.len();
    let max_lag = lags.max_lag();
    if n <= max_lag {
        return Err(Error::InsufficientHistory(format!(
            "series of length {n} is too short for max lag {max_lag}"
        )));
    }
    let points = (0..n - max_lag)
        .map(|k| lags.lags().iter().map(|&l| series[k + l]).collect())
        .collect();
    PointCloud::new(points)
}

/// Pearson correlation matrix plus the tickers whose window had zero variance.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix<T> {
    pub values: SquareMatrix<T>,
    pub degenerate: Vec<usize>,
}

/// Pearson correlations of the columns of `window` (rows are dates).
///
/// A zero-variance column correlates 0 with everything else and 1 with itself.
pub fn correlation_of_columns<T: Scalar>(window: &[Vec<T>]) -> Result<CorrelationMatrix<T>> {
    let len = window.len();
    if len < 2 {
        return Err(Error::InsufficientHistory(format!(
            "correlation window needs at least 2 rows, got {len}"
        )));
    }
    let n = window[0].len();
    if n < 2 {
        return Err(Error::Data(format!("correlation needs at least 2 tickers, got {n}")));
    }
    if window.iter().any(|r| r.len() != n) {
        return Err(Error::Validation("ragged correlation window".into()));
    }
    let lf = T::from_usize_lossy(len);
    let means: Vec<T> = (0..n).map(|i| window.iter().map(|r| r[i]).sum::<T>() / lf).collect();
    let dev: Vec<Vec<T>> = (0..n)
        .map(|i| window.iter().map(|r| r[i] - means[i]).collect())
        .collect();
    let ss: Vec<T> = dev.iter().map(|d| d.iter().map(|&x| x * x).sum()).collect();
    // relative cutoff so that constant columns with rounding noise count as constant
    let degenerate: Vec<usize> = (0..n)
        .filter(|&i| {
            let scale = window.iter().map(|r| r[i].abs()).fold(T::zero(), T::max);
            ss[i] <= (scale * T::epsilon()).powi(2) * lf * T::lit(16.0)
        })
        .collect();
    let mut c = SquareMatrix::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if degenerate.contains(&i) || degenerate.contains(&j) {
                T::zero()
            } else {
                let num: T = dev[i].iter().zip(&dev[j]).map(|(&a, &b)| a * b).sum();
                (num / (ss[i] * ss[j]).sqrt()).max(-T::one()).min(T::one())
            };
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    if !degenerate.is_empty() {
        log::warn!("{} zero-variance tickers in correlation window", degenerate.len());
    }
    Ok(CorrelationMatrix { values: c, degenerate })
}

/// Correlation of constituent returns over the `window` dates ending at
/// (and including) date index `t`.
pub fn correlation_matrix(
    constituents: &[Vec<f64>],
    t: usize,
    window: usize,
) -> Result<CorrelationMatrix<f64>> {
    if window == 0 {
        return Err(Error::Config("correlation window must be positive".into()));
    }
    if t >= constituents.len() {
        return Err(Error::Data(format!("date index {t} out of range")));
    }
    if t + 1 < window {
        return Err(Error::InsufficientHistory(format!(
            "correlation window {window} needs {window} dates of history, only {} available",
            t + 1
        )));
    }
    correlation_of_columns(&constituents[t + 1 - window..=t])
}

/// Tolerance for correlations outside `[-1, 1]` before they are rejected.
pub const CORRELATION_TOLERANCE: f64 = 1e-9;

/// `D(i,j) = sqrt(2 (1 - C(i,j)))`.
pub fn corr_to_distance<T: Scalar>(c: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let n = c.dim();
    let tol = T::lit(CORRELATION_TOLERANCE);
    if !c.is_symmetric(tol) {
        return Err(Error::Validation("correlation matrix is not symmetric".into()));
    }
    let mut d = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = c[(i, j)];
            if v.is_nan() || v > T::one() + tol || v < -T::one() - tol {
                return Err(Error::Validation(format!(
                    "correlation entry ({i},{j}) = {v} outside [-1, 1]"
                )));
            }
            let v = v.max(-T::one()).min(T::one());
            d[(i, j)] = (T::lit(2.0) * (T::one() - v)).sqrt();
        }
    }
    Ok(d)
}

/// Classical (Torgerson) MDS of a distance matrix into `target_dim` dimensions.
///
/// Negative eigenvalues of the double-centred Gram matrix are clamped to 0.
pub fn classical_mds<T: Scalar>(d: &SquareMatrix<T>, target_dim: usize) -> Result<PointCloud<T>> {
    let n = d.dim();
    if n == 0 {
        return Err(Error::Validation("empty distance matrix".into()));
    }
    if target_dim == 0 || target_dim + 1 > n {
        return Err(Error::Config(format!(
            "MDS target dimension {target_dim} needs 1 <= m <= n-1 with n = {n}"
        )));
    }
    let tol = T::lit(1e-9);
    for i in 0..n {
        if d[(i, i)].abs() > tol {
            return Err(Error::Validation(format!("distance diagonal ({i},{i}) is non-zero")));
        }
        for j in 0..n {
            if d[(i, j)] < T::zero() || !d[(i, j)].is_finite() {
                return Err(Error::Validation(format!(
                    "distance entry ({i},{j}) = {} is negative or non-finite",
                    d[(i, j)]
                )));
            }
        }
    }
    if !d.is_symmetric(tol) {
        return Err(Error::Validation("distance matrix is not symmetric".into()));
    }
    let squared = SquareMatrix::from_fn(n, |i, j| d[(i, j)] * d[(i, j)]);
    let b = squared.double_center();
    project_top(&b, target_dim)
}

/// Coordinates `sqrt(max(λ_k, 0)) · v_k` for the top `m` eigenpairs.
fn project_top<T: Scalar>(gram: &SquareMatrix<T>, m: usize) -> Result<PointCloud<T>> {
    let n = gram.dim();
    let eig = symmetric_eigen(gram)?;
    let scales: Vec<T> = eig.values[..m].iter().map(|&l| l.max(T::zero()).sqrt()).collect();
    let points = (0..n)
        .map(|i| (0..m).map(|k| scales[k] * eig.vectors[k][i]).collect())
        .collect();
    PointCloud::new(points)
}

/// Gaussian kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth<T> {
    /// Median of the pairwise distances; falls back to 1 when every row is identical.
    Median,
    Fixed(T),
}

impl<T: Scalar> Bandwidth<T> {
    pub fn resolve(&self, rows: &[Vec<T>]) -> Result<T> {
        match *self {
            Bandwidth::Fixed(s) if s > T::zero() && s.is_finite() => Ok(s),
            Bandwidth::Fixed(s) => Err(Error::Config(format!("kernel bandwidth must be positive, got {s}"))),
            Bandwidth::Median => {
                let mut dists = Vec::new();
                for i in 0..rows.len() {
                    for j in (i + 1)..rows.len() {
                        dists.push(euclidean(&rows[i], &rows[j]));
                    }
                }
                dists.sort_by(|a, b| a.total_cmp_finite(b));
                let med = match dists.len() {
                    0 => T::zero(),
                    k if k % 2 == 1 => dists[k / 2],
                    k => (dists[k / 2 - 1] + dists[k / 2]) / T::lit(2.0),
                };
                Ok(if med > T::zero() { med } else { T::one() })
            }
        }
    }
}

/// Gaussian-kernel PCA of the rows of `factors` (n stocks × d factors) into `target_dim` dimensions.
pub fn kpca_embed<T: Scalar>(
    factors: &[Vec<T>],
    target_dim: usize,
    bandwidth: Bandwidth<T>,
) -> Result<PointCloud<T>> {
    let n = factors.len();
    if n < 2 {
        return Err(Error::Data(format!("kPCA needs at least 2 rows, got {n}")));
    }
    let d = factors[0].len();
    if factors.iter().any(|r| r.len() != d) {
        return Err(Error::Validation("ragged factor matrix".into()));
    }
    if target_dim == 0 || target_dim >= d || target_dim + 1 > n {
        return Err(Error::Config(format!(
            "kPCA target dimension {target_dim} needs 1 <= m < d = {d} and m <= n-1 = {}",
            n - 1
        )));
    }
    if factors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite factor value".into()));
    }
    let sigma = bandwidth.resolve(factors)?;
    let denom = T::lit(2.0) * sigma * sigma;
    let kernel = SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            T::one()
        } else {
            let dist = euclidean(&factors[i], &factors[j]);
            (-(dist * dist) / denom).exp()
        }
    });
    project_top(&kernel.center(), target_dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn takens_small() {
        let x: Vec<f64> = (1..=7).map(f64::from).collect();
        let c = takens_embed(&x, &LagSet::new(vec![0, 1, 2]).unwrap()).unwrap();
        assert_eq!(c.len(), 5);
        // hand-built second row of the delay matrix: (x2, x3, x4) with 1-based x
        assert_eq!(c.points()[1], vec![2.0, 3.0, 4.0]);
        assert_eq!(c.points()[0], vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn takens_default_lags() {
        let x = vec![0.0f64; 252];
        let c = takens_embed(&x, &LagSet::default()).unwrap();
        assert_eq!((c.len(), c.dim()), (192, 4));
        let id = takens_embed(&x[..10], &LagSet::new(vec![0]).unwrap()).unwrap();
        assert_eq!((id.len(), id.dim()), (10, 1));
        assert!(takens_embed(&x[..60], &LagSet::default()).is_err());
    }

    #[test]
    fn lagset_validation() {
        assert!(LagSet::new(vec![1, 2]).is_err());
        assert!(LagSet::new(vec![0, 2, 2]).is_err());
        assert!(LagSet::new(vec![]).is_err());
    }

    fn pearson_oracle(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let saa: f64 = a.iter().map(|x| x * x).sum();
        let sbb: f64 = b.iter().map(|x| x * x).sum();
        (n * sab - sa * sb) / ((n * saa - sa * sa).sqrt() * (n * sbb - sb * sb).sqrt())
    }

    #[test]
    fn correlation_examples() {
        let w = vec![vec![1.0, 1.0, -1.0], vec![2.0, 2.0, -2.0], vec![3.0, 4.0, -3.0]];
        let c = correlation_of_columns(&w).unwrap();
        let want = pearson_oracle(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]);
        assert!((want - 0.98198).abs() < 1e-5);
        assert!((c.values[(0, 1)] - want).abs() < 1e-12);
        assert!((c.values[(0, 2)] + 1.0).abs() < 1e-12);
        assert_eq!(c.values[(1, 1)], 1.0);
    }

    #[test]
    fn constant_column_flagged() {
        let w = vec![vec![1.0, 0.5], vec![2.0, 0.5], vec![3.0, 0.5]];
        let c = correlation_of_columns(&w).unwrap();
        assert_eq!(c.degenerate, vec![1]);
        assert_eq!(c.values[(0, 1)], 0.0);
        assert_eq!(c.values[(1, 1)], 1.0);
    }

    #[test]
    fn correlation_window_bounds() {
        let rows = vec![vec![0.1, 0.2]; 5];
        assert!(matches!(correlation_matrix(&rows, 2, 4), Err(Error::InsufficientHistory(_))));
        assert!(correlation_matrix(&rows, 4, 5).is_ok());
    }

    #[test]
    fn mantegna_examples() {
        let c = SquareMatrix::from_rows(&[
            vec![1.0, 0.0, -1.0],
            vec![0.0, 1.0, 1.0 + 5e-10],
            vec![-1.0, 1.0 + 5e-10, 1.0],
        ])
        .unwrap();
        let d = corr_to_distance(&c).unwrap();
        assert_eq!(d[(0, 0)], 0.0);
        assert!((d[(0, 1)] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d[(0, 2)], 2.0);
        assert_eq!(d[(1, 2)], 0.0);
        let bad = SquareMatrix::from_rows(&[vec![1.0, 1.1], vec![1.1, 1.0]]).unwrap();
        assert!(corr_to_distance(&bad).is_err());
    }

    #[test]
    fn mds_collinear() {
        let d = SquareMatrix::<f64>::from_rows(&[
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        let cloud = classical_mds(&d, 2).unwrap();
        let rec = cloud.distance_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((rec[(i, j)] - d[(i, j)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mds_degenerate_and_errors() {
        let z = SquareMatrix::<f64>::zeros(4);
        let c = classical_mds(&z, 2).unwrap();
        assert!(c.points().iter().flatten().all(|x| *x == 0.0));
        assert!(classical_mds(&z, 4).is_err());
        let mut neg = SquareMatrix::<f64>::zeros(3);
        neg[(0, 1)] = -1.0;
        neg[(1, 0)] = -1.0;
        assert!(classical_mds(&neg, 1).is_err());
    }

    #[test]
    fn kpca_identical_rows_collapse() {
        let rows = vec![vec![1.0f64, 2.0, 3.0]; 4];
        let c = kpca_embed(&rows, 2, Bandwidth::Median).unwrap();
        assert!(c.points().iter().flatten().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn kpca_two_rows_closed_form() {
        // K = [[1,k],[k,1]], k = exp(-|f0-f1|^2 / (2σ^2)); centred K = a[[1,-1],[-1,1]] with a = (1-k)/2.
        // Top eigenpair: 1-k with (1,-1)/√2, so the coordinates are ±sqrt((1-k)/2).
        let rows = vec![vec![0.0, 0.0], vec![3.0, 4.0]];
        let sigma = 2.0;
        let k = (-25.0f64 / (2.0 * sigma * sigma)).exp();
        let want = ((1.0 - k) / 2.0).sqrt();
        let c = kpca_embed(&rows, 1, Bandwidth::Fixed(sigma)).unwrap();
        assert!((c.points()[0][0] - want).abs() < 1e-12);
        assert!((c.points()[1][0] + want).abs() < 1e-12);
    }

    #[test]
    fn kpca_errors() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]];
        assert!(kpca_embed(&rows, 2, Bandwidth::Median).is_err());
        assert!(kpca_embed(&rows, 1, Bandwidth::Fixed(0.0)).is_err());
        assert!(kpca_embed(&rows[..1], 1, Bandwidth::Median).is_err());
    }

    #[test]
    fn cloud_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let c = PointCloud::new(vec![vec![0.5, -1.25], vec![3.0, 1e-3]])
            .unwrap()
            .with_provenance(CloudKind::Takens, "2020-01-02", "lags=0,1");
        c.save_csv(&p).unwrap();
        let back = PointCloud::<f64>::load_csv(&p).unwrap();
        assert_eq!(back, c);
    }
}
