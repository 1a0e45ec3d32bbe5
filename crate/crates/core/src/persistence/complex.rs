use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::scalar::Scalar;

/// Highest homology dimension the builders and reducer accept.
pub const MAX_HOMOLOGY_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex<T> {
    /// Strictly ascending vertex ids.
    pub vertices: Vec<usize>,
    pub value: T,
}

impl<T> Simplex<T> {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Packs up to four ascending vertex ids into one hash key.
pub(crate) fn simplex_key(vertices: &[usize]) -> u128 {
    debug_assert!(vertices.len() <= 4);
    vertices
        .iter()
        .enumerate()
        .fold(0u128, |acc, (i, &v)| acc | (((v as u128) + 1) << (32 * i)))
}

pub(crate) fn filtration_order<T: Scalar>(a: &Simplex<T>, b: &Simplex<T>) -> std::cmp::Ordering {
    a.value
        .total_cmp_finite(&b.value)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

/// Simplices in filtration order `(value, dimension, vertex tuple)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex<T> {
    simplices: Vec<Simplex<T>>,
    max_dim: usize,
    max_radius: T,
}

impl<T: Scalar> FilteredComplex<T> {
    /// Sorts and validates an explicit filtration.
    ///
    /// `max_dim` caps the homology computed by [`crate::persistence::reduce`];
    /// simplices up to dimension `max_dim + 1` take part in the reduction.
    pub fn new(simplices: Vec<(Vec<usize>, T)>, max_dim: usize) -> Result<Self> {
        if max_dim > MAX_HOMOLOGY_DIM {
            return Err(Error::Config(format!(
                "max_dim {max_dim} exceeds supported {MAX_HOMOLOGY_DIM}"
            )));
        }
        let mut out = Vec::with_capacity(simplices.len());
        for (vertices, value) in simplices {
            if vertices.is_empty() || vertices.len() > MAX_HOMOLOGY_DIM + 2 {
                return Err(Error::Validation(format!(
                    "simplex {vertices:?} must have 1..={} vertices",
                    MAX_HOMOLOGY_DIM + 2
                )));
            }
            if vertices.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Validation(format!(
                    "simplex {vertices:?} vertices must be strictly ascending"
                )));
            }
            if vertices.iter().any(|&v| v >= u32::MAX as usize) {
                return Err(Error::Validation("vertex id out of range".into()));
            }
            if !value.is_finite() || value < T::zero() {
                return Err(Error::Validation(format!(
                    "simplex {vertices:?} has invalid filtration value {value}"
                )));
            }
            out.push(Simplex { vertices, value });
        }
        out.sort_by(filtration_order);
        let mut seen: HashMap<u128, T> = HashMap::with_capacity(out.len());
        for s in &out {
            if seen.insert(simplex_key(&s.vertices), s.value).is_some() {
                return Err(Error::Validation(format!("simplex {:?} listed twice", s.vertices)));
            }
            if s.vertices.len() > 1 {
                for face in faces(&s.vertices) {
                    match seen.get(&simplex_key(&face)) {
                        Some(v) if *v <= s.value => {}
                        Some(v) => {
                            return Err(Error::Validation(format!(
                                "face {face:?} enters at {v} after simplex {:?} at {}",
                                s.vertices, s.value
                            )))
                        }
                        None => {
                            return Err(Error::Validation(format!(
                                "face {face:?} of simplex {:?} is missing",
                                s.vertices
                            )))
                        }
                    }
                }
            }
        }
        let max_radius = out.last().map(|s| s.value).unwrap_or_else(T::zero);
        Ok(Self {
            simplices: out,
            max_dim,
            max_radius,
        })
    }

    /// For builders that already emit a valid, sorted filtration.
    pub(crate) fn from_sorted(simplices: Vec<Simplex<T>>, max_dim: usize, max_radius: T) -> Self {
        debug_assert!(simplices.windows(2).all(|w| filtration_order(&w[0], &w[1]).is_le()));
        Self {
            simplices,
            max_dim,
            max_radius,
        }
    }

    pub fn simplices(&self) -> &[Simplex<T>] {
        &self.simplices
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Filtration threshold the complex was built with.
    pub fn max_radius(&self) -> T {
        self.max_radius
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }
}

/// Codimension-1 faces, each obtained by dropping one vertex.
pub(crate) fn faces(vertices: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0..vertices.len()).map(move |skip| {
        vertices
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &v)| v)
            .collect()
    })
}

/// Rips filtration threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxRadius<T> {
    /// The cloud diameter: every edge is present.
    Auto,
    Fixed(T),
}

/// Vietoris–Rips (flag) filtration up to simplices of dimension `max_dim + 1`.
///
/// Vertices enter at 0, edges at their Euclidean length, higher simplices at
/// their longest edge. Simplices above the radius are left out.
pub fn build_rips_filtration<T: Scalar>(
    cloud: &PointCloud<T>,
    max_dim: usize,
    max_radius: MaxRadius<T>,
) -> Result<FilteredComplex<T>> {
    if cloud.is_empty() {
        return Err(Error::Validation("cannot build a filtration on an empty cloud".into()));
    }
    if max_dim > MAX_HOMOLOGY_DIM {
        return Err(Error::Config(format!(
            "max_dim {max_dim} exceeds supported {MAX_HOMOLOGY_DIM}"
        )));
    }
    let n = cloud.len();
    if n >= u32::MAX as usize {
        return Err(Error::Validation("cloud too large".into()));
    }
    let dist = cloud.distance_matrix();
    let radius = match max_radius {
        MaxRadius::Auto => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| dist[(i, j)])
            .fold(T::zero(), T::max),
        MaxRadius::Fixed(r) if r >= T::zero() && r.is_finite() => r,
        MaxRadius::Fixed(r) => {
            return Err(Error::Config(format!("max_radius must be non-negative, got {r}")))
        }
    };

    let mut simplices: Vec<Simplex<T>> = (0..n)
        .map(|v| Simplex {
            vertices: vec![v],
            value: T::zero(),
        })
        .collect();
    // adjacency restricted to admitted edges, for clique expansion
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[(i, j)] <= radius {
                simplices.push(Simplex {
                    vertices: vec![i, j],
                    value: dist[(i, j)],
                });
                nbrs[i].push(j);
            }
        }
    }
    let top = max_dim + 1;
    if top >= 2 {
        for i in 0..n {
            for (a, &j) in nbrs[i].iter().enumerate() {
                for &k in &nbrs[i][a + 1..] {
                    if dist[(j, k)] > radius {
                        continue;
                    }
                    let v3 = dist[(i, j)].max(dist[(i, k)]).max(dist[(j, k)]);
                    simplices.push(Simplex {
                        vertices: vec![i, j, k],
                        value: v3,
                    });
                    if top >= 3 {
                        for &l in nbrs[k].iter() {
                            if dist[(i, l)] <= radius && dist[(j, l)] <= radius {
                                let v4 = v3.max(dist[(i, l)]).max(dist[(j, l)]).max(dist[(k, l)]);
                                simplices.push(Simplex {
                                    vertices: vec![i, j, k, l],
                                    value: v4,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    simplices.sort_by(filtration_order);
    Ok(FilteredComplex::from_sorted(simplices, max_dim, radius))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let c = PointCloud::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let f = build_rips_filtration(&c, 1, MaxRadius::Auto).unwrap();
        let got: Vec<(Vec<usize>, f64)> = f.simplices().iter().map(|s| (s.vertices.clone(), s.value)).collect();
        assert_eq!(got, vec![(vec![0], 0.0), (vec![1], 0.0), (vec![0, 1], 1.0)]);
    }

    #[test]
    fn unit_square_triangles_enter_at_diagonal() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let f = build_rips_filtration(&c, 2, MaxRadius::Auto).unwrap();
        let tris: Vec<_> = f.simplices().iter().filter(|s| s.dim() == 2).collect();
        assert_eq!(tris.len(), 4);
        assert!(tris.iter().all(|s| s.value == 2f64.sqrt()));
        assert_eq!(f.simplices().iter().filter(|s| s.dim() == 3).count(), 1);
        assert_eq!(f.len(), 4 + 6 + 4 + 1);
    }

    #[test]
    fn radius_cuts_edges() {
        let c = PointCloud::new(vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let f = build_rips_filtration(&c, 1, MaxRadius::Fixed(1.5)).unwrap();
        assert_eq!(f.len(), 4);
        let one = PointCloud::new(vec![vec![2.0, 2.0]]).unwrap();
        assert_eq!(build_rips_filtration(&one, 1, MaxRadius::Auto).unwrap().len(), 1);
    }

    #[test]
    fn explicit_complex_validation() {
        assert!(FilteredComplex::new(vec![(vec![0], 0.0), (vec![0, 1], 1.0)], 1).is_err());
        assert!(FilteredComplex::new(vec![(vec![0], 2.0), (vec![1], 0.0), (vec![0, 1], 1.0)], 1).is_err());
        assert!(FilteredComplex::new(vec![(vec![1, 0], 1.0)], 1).is_err());
        let ok = FilteredComplex::new(vec![(vec![0, 1], 1.0), (vec![1], 0.0), (vec![0], 0.0)], 1).unwrap();
        assert_eq!(ok.simplices()[2].vertices, vec![0, 1]);
    }
}
