//! Dense symmetric matrices and the cyclic Jacobi eigen solver used by MDS and kPCA.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from nested rows; every row must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Validation(format!(
                "matrix row {i} has length {}, expected {n}",
                r.len()
            )));
        }
        Ok(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    fn off_diagonal_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc += self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }

    /// `-1/2 * J M J` with `J = I - 11^T/n`, applied to `M` element-wise as given.
    ///
    /// Callers pass squared distances for MDS, or a kernel matrix with the
    /// factor `-2` pre-applied for kPCA (see [`SquareMatrix::center`]).
    pub fn double_center(&self) -> Self {
        let mut c = self.center();
        for x in c.data.iter_mut() {
            *x = *x * T::lit(-0.5);
        }
        c
    }

    /// `J M J`: subtract row and column means, add back the grand mean.
    pub fn center(&self) -> Self {
        let n = self.n;
        if n == 0 {
            return self.clone();
        }
        let nf = T::from_usize_lossy(n);
        let row_means: Vec<T> = (0..n).map(|i| self.row(i).iter().copied().sum::<T>() / nf).collect();
        let col_means: Vec<T> = (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)]).sum::<T>() / nf)
            .collect();
        let grand = row_means.iter().copied().sum::<T>() / nf;
        Self::from_fn(n, |i, j| self[(i, j)] - row_means[i] - col_means[j] + grand)
    }
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen decomposition of a symmetric matrix.
///
/// `values` are sorted descending; `vectors[k]` is the unit eigenvector for
/// `values[k]`, with its largest-magnitude component made positive (the first
/// such component on ties).
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    pub sweeps: usize,
}

pub const JACOBI_TOLERANCE: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigen solver.
///
/// Rotations are applied in row-major `(p, q)` order, `p < q`, every sweep,
/// so the output is a deterministic function of the input. Iteration stops
/// when the off-diagonal Frobenius norm drops below `1e-10` (or below a few
/// ulps of `‖A‖_F` when that is larger, which matters for `f32`).
pub fn symmetric_eigen<T: Scalar>(matrix: &SquareMatrix<T>) -> Result<SymmetricEigen<T>> {
    let n = matrix.dim();
    let scale_tol = T::epsilon() * T::lit(8.0) * matrix.frobenius();
    let tol = T::lit(JACOBI_TOLERANCE).max(scale_tol);
    if !matrix.is_symmetric(tol.max(T::epsilon() * T::lit(64.0) * matrix.frobenius())) {
        return Err(Error::Validation("eigen solver input is not symmetric".into()));
    }

    let mut a = matrix.clone();
    let mut v = SquareMatrix::identity(n);
    let mut sweeps = 0;
    loop {
        let off = a.off_diagonal_norm();
        if off < tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NotConverged {
                sweeps,
                residual: off.as_f64(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let sign = if tau >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (tau.abs() + (T::one() + tau * tau).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps index order among equal eigenvalues.
    order.sort_by(|&i, &j| a[(j, j)].total_cmp_finite(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<T> = (0..n).map(|row| v[(row, col)]).collect();
            orient(&mut vec);
            vec
        })
        .collect();
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Flip `vec` so its largest-magnitude entry is positive.
fn orient<T: Scalar>(vec: &mut [T]) {
    let mut best = 0;
    for (i, x) in vec.iter().enumerate() {
        if x.abs() > vec[best].abs() {
            best = i;
        }
    }
    if vec.get(best).is_some_and(|x| *x < T::zero()) {
        for x in vec.iter_mut() {
            *x = -*x;
        }
    }
}
