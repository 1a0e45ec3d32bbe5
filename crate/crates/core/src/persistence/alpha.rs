//! Alpha-complex filtration for low-dimensional clouds.
//!
//! The Delaunay triangulation is found by brute force (every `(k+1)`-subset
//! whose circumsphere is empty), which is fine for the few dozen points a
//! constituent cloud has. Filtration values are radii, not squared radii:
//! a simplex enters at the radius of its smallest empty circumsphere, or at
//! the value of the cheapest coface it is attached to.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};

use super::complex::{filtration_order, FilteredComplex, Simplex, MAX_HOMOLOGY_DIM};
use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::scalar::{euclidean, Scalar};

pub const ALPHA_MAX_AMBIENT_DIM: usize = 3;
const PERTURB_SEED: u64 = 0x5eed_a1fa;

pub fn build_alpha_filtration<T: Scalar>(cloud: &PointCloud<T>, max_dim: usize) -> Result<FilteredComplex<T>> {
    if cloud.is_empty() {
        return Err(Error::Validation("cannot build a filtration on an empty cloud".into()));
    }
    if cloud.dim() > ALPHA_MAX_AMBIENT_DIM {
        return Err(Error::Unsupported(format!(
            "alpha complex supports clouds in R^1..R^{ALPHA_MAX_AMBIENT_DIM}, got R^{}; use the rips filtration",
            cloud.dim()
        )));
    }
    if max_dim > MAX_HOMOLOGY_DIM {
        return Err(Error::Config(format!("max_dim {max_dim} exceeds supported {MAX_HOMOLOGY_DIM}")));
    }
    let n = cloud.len();
    let mut pts: Vec<Vec<T>> = cloud.points().to_vec();
    let k = cloud.dim().min(n - 1);
    if k < cloud.dim() {
        pts = project_to_affine_hull(&pts, k);
    }
    if k == 0 {
        let simplices = (0..n)
            .map(|v| Simplex {
                vertices: vec![v],
                value: T::zero(),
            })
            .collect();
        return Ok(FilteredComplex::from_sorted(simplices, max_dim, T::zero()));
    }

    let scale = cloud.diameter().max(T::one());
    let mut attempt = 0u64;
    let top = loop {
        match delaunay(&pts, k, scale) {
            Some(top) => break top,
            None if attempt < 8 => {
                attempt += 1;
                log::info!("alpha complex: degenerate configuration, applying perturbation #{attempt}");
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(PERTURB_SEED + attempt);
                let eps = scale * T::lit(1e-5) * T::lit(attempt as f64);
                pts = cloud_points_projected(cloud, k)
                    .into_iter()
                    .map(|p| {
                        p.into_iter()
                            .map(|x| x + eps * T::lit(rng.random_range(-1.0..1.0)))
                            .collect()
                    })
                    .collect();
            }
            None => {
                return Err(Error::Data(
                    "alpha complex: configuration stays degenerate after perturbation".into(),
                ))
            }
        }
    };

    // every face of every Delaunay simplex, grouped by dimension
    let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); k + 1];
    for s in &top {
        let m = s.len();
        for mask in 1u32..(1 << m) {
            let face: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect();
            by_dim[face.len() - 1].insert(face);
        }
    }
    let mut value: BTreeMap<Vec<usize>, T> = BTreeMap::new();
    for dim in (1..=k).rev() {
        let cofaces: Vec<&Vec<usize>> = by_dim.get(dim + 1).map(|s| s.iter().collect()).unwrap_or_default();
        for s in &by_dim[dim] {
            let verts: Vec<&[T]> = s.iter().map(|&v| pts[v].as_slice()).collect();
            let (center, radius) = circumsphere(&verts).expect("Delaunay faces are non-degenerate");
            let v = if dim == k {
                radius
            } else {
                let gabriel = (0..pts.len())
                    .filter(|p| !s.contains(p))
                    .all(|p| euclidean(&pts[p], &center) >= radius);
                let attached = cofaces
                    .iter()
                    .filter(|c| s.iter().all(|v| c.contains(v)))
                    .map(|c| value[*c])
                    .reduce(T::min);
                match (gabriel, attached) {
                    (true, Some(a)) => radius.min(a),
                    (true, None) => radius,
                    (false, Some(a)) => a,
                    (false, None) => radius,
                }
            };
            value.insert(s.clone(), v);
        }
    }

    let mut simplices: Vec<Simplex<T>> = (0..n)
        .map(|v| Simplex {
            vertices: vec![v],
            value: T::zero(),
        })
        .collect();
    for (verts, v) in value {
        if verts.len() <= max_dim + 2 {
            simplices.push(Simplex { vertices: verts, value: v });
        }
    }
    simplices.sort_by(filtration_order);
    let max_radius = simplices.last().map(|s| s.value).unwrap_or_else(T::zero);
    Ok(FilteredComplex::from_sorted(simplices, max_dim, max_radius))
}

fn cloud_points_projected<T: Scalar>(cloud: &PointCloud<T>, k: usize) -> Vec<Vec<T>> {
    if k < cloud.dim() {
        project_to_affine_hull(cloud.points(), k)
    } else {
        cloud.points().to_vec()
    }
}

/// Coordinates in an orthonormal basis of the span of `p_i - p_0` (Gram–Schmidt),
/// truncated to `k` axes.
fn project_to_affine_hull<T: Scalar>(pts: &[Vec<T>], k: usize) -> Vec<Vec<T>> {
    let origin = &pts[0];
    let diffs: Vec<Vec<T>> = pts.iter().map(|p| p.iter().zip(origin).map(|(a, b)| *a - *b).collect()).collect();
    let mut basis: Vec<Vec<T>> = Vec::new();
    let tol = T::lit(1e-12);
    for d in diffs.iter().skip(1) {
        if basis.len() == k {
            break;
        }
        let mut v = d.clone();
        for b in &basis {
            let dot: T = v.iter().zip(b).map(|(x, y)| *x * *y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * *y;
            }
        }
        let norm = v.iter().map(|x| *x * *x).sum::<T>().sqrt();
        if norm > tol {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    diffs
        .iter()
        .map(|d| {
            let mut c: Vec<T> = basis.iter().map(|b| d.iter().zip(b).map(|(x, y)| *x * *y).sum()).collect();
            c.resize(k, T::zero());
            c
        })
        .collect()
}

/// Top simplices of the Delaunay triangulation in `R^k`, or `None` when the
/// points are not in general position.
fn delaunay<T: Scalar>(pts: &[Vec<T>], k: usize, scale: T) -> Option<Vec<Vec<usize>>> {
    let n = pts.len();
    let tol = scale * T::lit(1e-9);
    let mut out = Vec::new();
    let mut subset: Vec<usize> = (0..=k).collect();
    loop {
        let verts: Vec<&[T]> = subset.iter().map(|&v| pts[v].as_slice()).collect();
        let (center, radius) = circumsphere(&verts)?;
        let mut empty = true;
        for p in 0..n {
            if subset.contains(&p) {
                continue;
            }
            let d = euclidean(&pts[p], &center);
            if (d - radius).abs() <= tol {
                // cospherical: not in general position
                return None;
            }
            if d < radius {
                empty = false;
                break;
            }
        }
        if empty {
            out.push(subset.clone());
        }
        if !next_combination(&mut subset, n) {
            break;
        }
    }
    Some(out)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Centre and radius of the smallest sphere through `verts` (centre in their
/// affine hull). `None` for affinely dependent vertices.
pub(crate) fn circumsphere<T: Scalar>(verts: &[&[T]]) -> Option<(Vec<T>, T)> {
    let p0 = verts[0];
    let m = verts.len() - 1;
    if m == 0 {
        return Some((p0.to_vec(), T::zero()));
    }
    let e: Vec<Vec<T>> = verts[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| *a - *b).collect()).collect();
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(x, y)| *x * *y).sum::<T>();
    // G λ = b / 2 with G_ij = e_i·e_j, b_i = |e_i|^2
    let mut g: Vec<Vec<T>> = (0..m)
        .map(|i| {
            let mut row: Vec<T> = (0..m).map(|j| dot(&e[i], &e[j])).collect();
            row.push(dot(&e[i], &e[i]) / T::lit(2.0));
            row
        })
        .collect();
    let scale = g.iter().map(|r| r[..m].iter().fold(T::zero(), |a, x| a.max(x.abs()))).fold(T::zero(), T::max);
    for col in 0..m {
        let piv = (col..m).max_by(|&a, &b| g[a][col].abs().total_cmp_finite(&g[b][col].abs()))?;
        if g[piv][col].abs() <= scale * T::lit(1e-13) {
            return None;
        }
        g.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = g[r][col] / g[col][col];
                for c in col..=m {
                    let x = g[col][c];
                    g[r][c] -= f * x;
                }
            }
        }
    }
    let lambda: Vec<T> = (0..m).map(|i| g[i][m] / g[i][i]).collect();
    let offset: Vec<T> = (0..p0.len())
        .map(|c| (0..m).map(|i| lambda[i] * e[i][c]).sum())
        .collect();
    let radius = offset.iter().map(|x| *x * *x).sum::<T>().sqrt();
    let center = p0.iter().zip(&offset).map(|(a, b)| *a + *b).collect();
    Some((center, radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::{build_rips_filtration, reduce, MaxRadius};

    fn value_of(c: &FilteredComplex<f64>, v: &[usize]) -> f64 {
        c.simplices().iter().find(|s| s.vertices == v).unwrap().value
    }

    #[test]
    fn acute_triangle() {
        // equilateral side 2: edges Gabriel at radius 1, triangle at circumradius 2/√3
        let h = 3f64.sqrt();
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, h]]).unwrap();
        let c = build_alpha_filtration(&cloud, 1).unwrap();
        assert!((value_of(&c, &[0, 1]) - 1.0).abs() < 1e-12);
        assert!((value_of(&c, &[0, 1, 2]) - 2.0 / h).abs() < 1e-12);
    }

    #[test]
    fn obtuse_triangle_long_edge_attached() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]]).unwrap();
        let c = build_alpha_filtration(&cloud, 1).unwrap();
        // circumcentre (2, -3.75): radius sqrt(4 + 14.0625)
        let r = (4.0f64 + 3.75 * 3.75).sqrt();
        assert!((value_of(&c, &[0, 1, 2]) - r).abs() < 1e-12);
        assert!((value_of(&c, &[0, 1]) - r).abs() < 1e-12);
        assert!((value_of(&c, &[0, 2]) - 0.5 * (4.0f64 + 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_perturbed() {
        let cloud = PointCloud::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let c = build_alpha_filtration(&cloud, 1).unwrap();
        assert_eq!(c.simplices().iter().filter(|s| s.dim() == 0).count(), 3);
        let d = reduce(&c).unwrap();
        assert_eq!(d.in_dim(0).count(), 3);
    }

    #[test]
    fn high_dimension_unsupported() {
        let cloud = PointCloud::new(vec![vec![0.0; 5], vec![1.0; 5]]).unwrap();
        assert!(matches!(build_alpha_filtration(&cloud, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn h0_is_half_of_rips_h0() {
        use rand::Rng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..9).map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
            let cloud = PointCloud::new(pts).unwrap();
            let alpha = reduce(&build_alpha_filtration(&cloud, 1).unwrap()).unwrap();
            let rips = reduce(&build_rips_filtration(&cloud, 1, MaxRadius::Auto).unwrap()).unwrap();
            let a: Vec<f64> = alpha.in_dim(0).filter_map(|p| p.death.finite()).collect();
            let r: Vec<f64> = rips.in_dim(0).filter_map(|p| p.death.finite()).map(|d| d / 2.0).collect();
            assert_eq!(a.len(), r.len());
            for (x, y) in a.iter().zip(&r) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }
}
