//! Naive reference computation of Rips persistence for tiny clouds.
//!
//! Shares no code with the filtration builder or the reducer: simplices are
//! enumerated from vertex bitmasks, the boundary matrix is dense, and the
//! reduction is the textbook left-to-right algorithm without clearing.

use super::complex::MaxRadius;
use super::diagram::{PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::scalar::Scalar;

pub const ORACLE_MAX_POINTS: usize = 8;

pub fn brute_force_diagram<T: Scalar>(
    cloud: &PointCloud<T>,
    max_dim: usize,
    max_radius: MaxRadius<T>,
) -> Result<PersistenceDiagram<T>> {
    let pts = cloud.points();
    let n = pts.len();
    if n == 0 {
        return Err(Error::Validation("empty cloud".into()));
    }
    if n > ORACLE_MAX_POINTS {
        return Err(Error::Unsupported(format!(
            "brute-force oracle refuses {n} points (limit {ORACLE_MAX_POINTS})"
        )));
    }
    let dist = |a: usize, b: usize| -> T {
        let mut s = T::zero();
        for k in 0..pts[a].len() {
            let d = pts[a][k] - pts[b][k];
            s += d * d;
        }
        s.sqrt()
    };
    let mut diameter = T::zero();
    for a in 0..n {
        for b in a + 1..n {
            diameter = diameter.max(dist(a, b));
        }
    }
    let radius = match max_radius {
        MaxRadius::Auto => diameter,
        MaxRadius::Fixed(r) => r,
    };

    // (value, size, vertex list, mask)
    let mut cells: Vec<(T, usize, Vec<usize>, u32)> = Vec::new();
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size > max_dim + 2 {
            continue;
        }
        let verts: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
        let mut value = T::zero();
        for a in 0..verts.len() {
            for b in a + 1..verts.len() {
                value = value.max(dist(verts[a], verts[b]));
            }
        }
        if value <= radius {
            cells.push((value, size, verts, mask));
        }
    }
    cells.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .expect("finite")
            .then(x.1.cmp(&y.1))
            .then_with(|| x.2.cmp(&y.2))
    });
    let m = cells.len();
    let pos_of = |mask: u32| cells.iter().position(|c| c.3 == mask).expect("face present");

    let mut matrix: Vec<Vec<bool>> = vec![vec![false; m]; m];
    for (j, cell) in cells.iter().enumerate() {
        if cell.1 < 2 {
            continue;
        }
        for &v in &cell.2 {
            matrix[j][pos_of(cell.3 & !(1 << v))] = true;
        }
    }
    let low = |col: &Vec<bool>| col.iter().rposition(|&b| b);
    let mut lows: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        loop {
            let Some(l) = low(&matrix[j]) else { break };
            let Some(k) = (0..j).find(|&k| lows[k] == Some(l)) else { break };
            let other = matrix[k].clone();
            for (x, y) in matrix[j].iter_mut().zip(other) {
                *x ^= y;
            }
        }
        lows[j] = low(&matrix[j]);
    }

    let mut paired = vec![false; m];
    let mut pairs = Vec::new();
    for j in 0..m {
        if let Some(i) = lows[j] {
            paired[i] = true;
            paired[j] = true;
            if cells[i].0 < cells[j].0 {
                pairs.push(PersistencePair::finite(cells[i].1 - 1, cells[i].0, cells[j].0));
            }
        }
    }
    for j in 0..m {
        if !paired[j] && cells[j].1 <= max_dim + 1 {
            pairs.push(PersistencePair::essential(cells[j].1 - 1, cells[j].0));
        }
    }
    Ok(PersistenceDiagram::new(pairs, max_dim, radius))
}
