use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Death of a class: a filtration value, or never (the class survives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Death<T> {
    At(T),
    Never,
}

impl<T: Scalar> Death<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Death::At(v) => Some(v),
            Death::Never => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Death::Never)
    }

    /// `x < death`, with `Never` above everything.
    pub fn after(self, x: T) -> bool {
        match self {
            Death::At(v) => x < v,
            Death::Never => true,
        }
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Death::At(a), Death::At(b)) => a.total_cmp_finite(b),
            (Death::At(_), Death::Never) => Ordering::Less,
            (Death::Never, Death::At(_)) => Ordering::Greater,
            (Death::Never, Death::Never) => Ordering::Equal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth: T,
    pub death: Death<T>,
}

impl<T: Scalar> PersistencePair<T> {
    pub fn finite(dim: usize, birth: T, death: T) -> Self {
        Self {
            dim,
            birth,
            death: Death::At(death),
        }
    }

    pub fn essential(dim: usize, birth: T) -> Self {
        Self {
            dim,
            birth,
            death: Death::Never,
        }
    }

    fn cmp_total(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.total_cmp_finite(&other.birth))
            .then(self.death.cmp_total(&other.death))
    }
}

/// Multiset of `(dim, birth, death)` pairs, kept in canonical sorted order
/// so that `==` is multiset equality.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram<T> {
    pairs: Vec<PersistencePair<T>>,
    max_dim: usize,
    max_radius: T,
}

impl<T: Scalar> PersistenceDiagram<T> {
    /// `max_radius` is the filtration threshold; it is used to clamp
    /// essential classes when the diagram has no finite values.
    pub fn new(mut pairs: Vec<PersistencePair<T>>, max_dim: usize, max_radius: T) -> Self {
        pairs.sort_by(PersistencePair::cmp_total);
        Self {
            pairs,
            max_dim,
            max_radius,
        }
    }

    pub fn pairs(&self) -> &[PersistencePair<T>] {
        &self.pairs
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_radius(&self) -> T {
        self.max_radius
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Rank of `H_dim` at filtration value `t`: pairs with `birth <= t < death`.
    pub fn betti_at(&self, dim: usize, t: T) -> usize {
        self.in_dim(dim).filter(|p| p.birth <= t && p.death.after(t)).count()
    }

    /// Largest finite birth or death value, if any.
    pub fn max_finite_value(&self) -> Option<T> {
        self.pairs
            .iter()
            .flat_map(|p| [Some(p.birth), p.death.finite()])
            .flatten()
            .reduce(T::max)
    }

    /// `dim,birth,death` rows with the literal `inf` for essential classes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# max_dim={} max_radius={}", self.max_dim, self.max_radius)?;
        writeln!(out, "dim,birth,death")?;
        for p in &self.pairs {
            match p.death {
                Death::At(d) => writeln!(out, "{},{},{}", p.dim, p.birth, d)?,
                Death::Never => writeln!(out, "{},{},inf", p.dim, p.birth)?,
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let err = |line: usize, msg: String| Error::Parse {
            path: path.display().to_string(),
            line,
            msg,
        };
        let mut max_dim = None;
        let mut max_radius = None;
        let mut header = false;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim();
            if raw.is_empty() {
                continue;
            }
            if let Some(meta) = raw.strip_prefix('#') {
                for tok in meta.split_whitespace() {
                    match tok.split_once('=') {
                        Some(("max_dim", v)) => {
                            max_dim = Some(v.parse::<usize>().map_err(|e| err(line, format!("bad max_dim: {e}")))?)
                        }
                        Some(("max_radius", v)) => {
                            max_radius =
                                Some(v.parse::<f64>().map_err(|e| err(line, format!("bad max_radius: {e}")))?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header {
                if raw != "dim,birth,death" {
                    return Err(err(line, "expected header `dim,birth,death`".into()));
                }
                header = true;
                continue;
            }
            let f: Vec<&str> = raw.split(',').collect();
            if f.len() != 3 {
                return Err(err(line, format!("expected 3 fields, got {}", f.len())));
            }
            let dim = f[0].parse::<usize>().map_err(|e| err(line, format!("bad dim: {e}")))?;
            let birth = f[1].parse::<f64>().map_err(|e| err(line, format!("bad birth: {e}")))?;
            let death = if f[2] == "inf" {
                Death::Never
            } else {
                Death::At(T::lit(f[2].parse::<f64>().map_err(|e| err(line, format!("bad death: {e}")))?))
            };
            pairs.push(PersistencePair {
                dim,
                birth: T::lit(birth),
                death,
            });
        }
        if !header {
            return Err(Error::Validation(format!("{}: not a diagram file", path.display())));
        }
        let max_dim = max_dim.unwrap_or_else(|| pairs.iter().map(|p| p.dim).max().unwrap_or(0));
        let diagram = Self::new(pairs, max_dim, T::zero());
        let fallback = diagram.max_finite_value().unwrap_or_else(T::zero);
        Ok(Self {
            max_radius: max_radius.map(T::lit).unwrap_or(fallback),
            ..diagram
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_inf_literal() {
        let d = PersistenceDiagram::new(
            vec![
                PersistencePair::essential(0, 0.0),
                PersistencePair::finite(1, 1.0, 2f64.sqrt()),
                PersistencePair::finite(0, 0.0, 1.0),
            ],
            1,
            2.0,
        );
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\n0,0,inf\n"));
        assert!(text.contains("\n1,1,1.4142135623730951\n"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, &text).unwrap();
        assert_eq!(PersistenceDiagram::<f64>::load_csv(&p).unwrap(), d);
    }

    #[test]
    fn betti_half_open() {
        let d = PersistenceDiagram::new(vec![PersistencePair::finite(0, 0.0, 1.0)], 0, 1.0);
        assert_eq!(d.betti_at(0, 0.0), 1);
        assert_eq!(d.betti_at(0, 1.0), 0);
    }
}
