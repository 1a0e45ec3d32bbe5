use std::collections::HashMap;

use super::complex::{simplex_key, FilteredComplex};
use super::diagram::{PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bookkeeping from one reduction, for audits and tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReductionStats {
    /// Simplices of dimension `<= max_dim + 1`.
    pub participating: usize,
    pub finite_pairs: usize,
    pub essential_pairs: usize,
    pub zero_persistence_dropped: usize,
    /// Top-dimension simplices (dimension `max_dim + 1`) whose column reduced to zero.
    pub unpaired_top: usize,
    pub cleared_columns: usize,
    pub column_additions: usize,
}

pub fn reduce<T: Scalar>(complex: &FilteredComplex<T>) -> Result<PersistenceDiagram<T>> {
    reduce_with_stats(complex).map(|(d, _)| d)
}

/// Standard Z/2 column reduction of the boundary matrix with clearing.
///
/// Columns are reduced one dimension at a time from `max_dim + 1` down to 1,
/// left to right in filtration order. A column that becomes a pivot owner
/// clears the column of its lowest face, which is then known to be a birth.
pub fn reduce_with_stats<T: Scalar>(
    complex: &FilteredComplex<T>,
) -> Result<(PersistenceDiagram<T>, ReductionStats)> {
    let simplices = complex.simplices();
    let max_dim = complex.max_dim();
    let top = max_dim + 1;

    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    // rank[pos] = position of simplex `pos` within its dimension
    let mut rank = vec![usize::MAX; simplices.len()];
    for (pos, s) in simplices.iter().enumerate() {
        if s.dim() > top {
            continue;
        }
        rank[pos] = by_dim[s.dim()].len();
        by_dim[s.dim()].push(pos);
    }
    let n = simplices.len();
    let mut stats = ReductionStats {
        participating: by_dim.iter().map(Vec::len).sum(),
        ..Default::default()
    };

    // Faces are looked up in dense tables for vertices and (when small
    // enough) edges, and in a hash index otherwise.
    let vertex_count = simplices.iter().flat_map(|s| s.vertices.last()).max().map_or(0, |&v| v + 1);
    let dense_edges = vertex_count <= 4096;
    let mut vertex_pos = vec![usize::MAX; vertex_count];
    let mut edge_pos = vec![usize::MAX; if dense_edges { vertex_count * vertex_count } else { 0 }];
    let mut index: HashMap<u128, usize> = HashMap::new();
    for (dim, list) in by_dim.iter().enumerate().take(top) {
        for &p in list {
            let v = &simplices[p].vertices;
            match dim {
                0 => vertex_pos[v[0]] = p,
                1 if dense_edges => edge_pos[v[0] * vertex_count + v[1]] = p,
                _ => {
                    index.insert(simplex_key(v), p);
                }
            }
        }
    }
    let lookup = |face: &[usize]| -> Option<usize> {
        let p = match face.len() {
            1 => vertex_pos[face[0]],
            2 if dense_edges => edge_pos[face[0] * vertex_count + face[1]],
            _ => return index.get(&simplex_key(face)).copied(),
        };
        (p != usize::MAX).then_some(p)
    };

    // boundary of `pos` as ascending face ranks
    let boundary = |pos: usize, out: &mut Vec<usize>| -> Result<()> {
        let s = &simplices[pos];
        out.clear();
        let k = s.vertices.len();
        let mut buf = [0usize; 4];
        for skip in 0..k {
            let mut m = 0;
            for (i, &v) in s.vertices.iter().enumerate() {
                if i != skip {
                    buf[m] = v;
                    m += 1;
                }
            }
            let face = &buf[..m];
            match lookup(face) {
                Some(f) if f < pos => out.push(rank[f]),
                Some(_) => {
                    return Err(Error::Integrity(format!(
                        "face {face:?} is ordered after simplex {:?}",
                        s.vertices
                    )))
                }
                None => {
                    return Err(Error::Integrity(format!(
                        "face {face:?} of simplex {:?} is absent",
                        s.vertices
                    )))
                }
            }
        }
        out.sort_unstable();
        Ok(())
    };

    let mut is_birth = vec![false; n];
    let mut is_death = vec![false; n];
    let mut pairs = Vec::new();

    for dim in (1..=top).rev() {
        let rows = by_dim[dim - 1].len();
        let columns: Vec<(usize, bool)> = by_dim[dim].iter().map(|&j| (j, is_birth[j])).collect();
        let mut on_pair = |face_rank: usize, j: usize, stats: &mut ReductionStats| {
            let low = by_dim[dim - 1][face_rank];
            is_birth[low] = true;
            is_death[j] = true;
            let birth = simplices[low].value;
            let death = simplices[j].value;
            if birth == death {
                stats.zero_persistence_dropped += 1;
            } else {
                pairs.push(PersistencePair::finite(dim - 1, birth, death));
                stats.finite_pairs += 1;
            }
        };
        let zero_columns = if rows <= BITSET_MAX_ROWS {
            reduce_dimension::<BitColumn>(&columns, rows, &boundary, &mut stats, &mut on_pair)?
        } else {
            reduce_dimension::<SparseColumn>(&columns, rows, &boundary, &mut stats, &mut on_pair)?
        };
        if dim == top {
            stats.unpaired_top += zero_columns;
        }
    }
    for dim in 0..=max_dim {
        for &j in &by_dim[dim] {
            if !is_birth[j] && !is_death[j] {
                pairs.push(PersistencePair::essential(dim, simplices[j].value));
                stats.essential_pairs += 1;
            }
        }
    }
    Ok((
        PersistenceDiagram::new(pairs, max_dim, complex.max_radius()),
        stats,
    ))
}

/// Row counts up to this use dense bitset columns.
const BITSET_MAX_ROWS: usize = 4096;

/// A Z/2 column indexed by face rank.
trait Column: Sized {
    fn from_rows(rows: &[usize], row_count: usize) -> Self;
    fn low(&self) -> Option<usize>;
    fn add(&mut self, other: &Self, scratch: &mut Vec<usize>);
}

struct SparseColumn(Vec<usize>);

impl Column for SparseColumn {
    fn from_rows(rows: &[usize], _: usize) -> Self {
        SparseColumn(rows.to_vec())
    }

    fn low(&self) -> Option<usize> {
        self.0.last().copied()
    }

    fn add(&mut self, other: &Self, scratch: &mut Vec<usize>) {
        symmetric_difference_into(&self.0, &other.0, scratch);
        std::mem::swap(&mut self.0, scratch);
    }
}

struct BitColumn(Vec<u64>);

impl Column for BitColumn {
    fn from_rows(rows: &[usize], row_count: usize) -> Self {
        let mut words = vec![0u64; row_count.div_ceil(64)];
        for &r in rows {
            words[r / 64] ^= 1 << (r % 64);
        }
        BitColumn(words)
    }

    fn low(&self) -> Option<usize> {
        let i = self.0.iter().rposition(|&w| w != 0)?;
        Some(i * 64 + 63 - self.0[i].leading_zeros() as usize)
    }

    fn add(&mut self, other: &Self, _: &mut Vec<usize>) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Reduces one dimension's columns left to right; returns how many
/// uncleared columns reduced to zero.
fn reduce_dimension<C: Column>(
    columns: &[(usize, bool)],
    rows: usize,
    boundary: &impl Fn(usize, &mut Vec<usize>) -> Result<()>,
    stats: &mut ReductionStats,
    on_pair: &mut impl FnMut(usize, usize, &mut ReductionStats),
) -> Result<usize> {
    // pivot_owner[row] = reduced column whose lowest entry is `row`
    let mut pivot_owner: Vec<Option<usize>> = vec![None; rows];
    let mut reduced: Vec<C> = Vec::new();
    let mut faces = Vec::new();
    let mut scratch = Vec::new();
    let mut zero = 0;
    for &(j, cleared) in columns {
        if cleared {
            stats.cleared_columns += 1;
            continue;
        }
        boundary(j, &mut faces)?;
        let mut col = C::from_rows(&faces, rows);
        while let Some(low) = col.low() {
            let Some(owner) = pivot_owner[low] else { break };
            col.add(&reduced[owner], &mut scratch);
            stats.column_additions += 1;
        }
        match col.low() {
            Some(low) => {
                pivot_owner[low] = Some(reduced.len());
                reduced.push(col);
                on_pair(low, j, stats);
            }
            None => zero += 1,
        }
    }
    Ok(zero)
}

/// `out = a Δ b` for ascending index lists.
fn symmetric_difference_into(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::{build_rips_filtration, Death, MaxRadius};
    use crate::pointcloud::PointCloud;

    /// Four vertices a,b,c,d; K1 adds ab, K2 bc, K3 ac, K4 cd, K5 bd, K6 fills abc.
    pub(crate) fn four_point_filtration() -> FilteredComplex<f64> {
        FilteredComplex::new(
            vec![
                (vec![0], 0.0),
                (vec![1], 0.0),
                (vec![2], 0.0),
                (vec![3], 0.0),
                (vec![0, 1], 1.0),
                (vec![1, 2], 2.0),
                (vec![0, 2], 3.0),
                (vec![2, 3], 4.0),
                (vec![1, 3], 5.0),
                (vec![0, 1, 2], 6.0),
            ],
            1,
        )
        .unwrap()
    }

    #[test]
    fn four_point_betti_table() {
        let d = reduce(&four_point_filtration()).unwrap();
        let b0: Vec<usize> = (0..=6).map(|i| d.betti_at(0, i as f64)).collect();
        let b1: Vec<usize> = (0..=6).map(|i| d.betti_at(1, i as f64)).collect();
        assert_eq!(b0, [4, 3, 2, 2, 1, 1, 1]);
        assert_eq!(b1, [0, 0, 0, 1, 1, 2, 1]);
    }

    #[test]
    fn three_four_five_triangle() {
        let c = PointCloud::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let (d, stats) = reduce_with_stats(&build_rips_filtration(&c, 1, MaxRadius::Auto).unwrap()).unwrap();
        let got: Vec<_> = d.pairs().iter().map(|p| (p.dim, p.birth, p.death)).collect();
        assert_eq!(
            got,
            vec![(0, 0.0, Death::At(3.0)), (0, 0.0, Death::At(4.0)), (0, 0.0, Death::Never)]
        );
        assert_eq!(stats.zero_persistence_dropped, 1);
    }

    #[test]
    fn single_point() {
        let c = PointCloud::new(vec![vec![1.0, 1.0]]).unwrap();
        let d = reduce(&build_rips_filtration(&c, 1, MaxRadius::Auto).unwrap()).unwrap();
        assert_eq!(d.pairs(), &[PersistencePair::essential(0, 0.0)]);
    }

    #[test]
    fn symmetric_difference() {
        let mut out = Vec::new();
        symmetric_difference_into(&[1, 3, 5], &[3, 4], &mut out);
        assert_eq!(out, vec![1, 4, 5]);
    }
}
