//! Small dense square matrices (dimension at most [`MAX_DIM`]) stored inline.

use std::fmt;
use std::ops::{Deref, DerefMut, Index, IndexMut, Mul};

use crate::error::{Error, Result};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 8;

/// Reciprocal condition numbers at or below this are treated as singular.
pub const RCOND_CUTOFF: f64 = 1e-14;

/// Fixed-capacity real vector of length at most [`MAX_DIM`].
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    len: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "vector length {len} exceeds {MAX_DIM}");
        Vector {
            len,
            data: [0.0; MAX_DIM],
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Vector::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len, other.len);
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data[..self.len]
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.data[..self.len]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

/// Square matrix with row-major inline storage.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: [f64; MAX_DIM * MAX_DIM],
}

impl Matrix {
    /// Zero matrix. Panics when `dim` is zero or exceeds [`MAX_DIM`].
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "matrix dimension {dim} outside 1..={MAX_DIM}"
        );
        Matrix {
            dim,
            data: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from row slices; every row must have the same length as the row count.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Matrix::from_fn(dim, |i, j| {
            assert_eq!(rows[i].len(), dim, "row {i} has wrong length");
            rows[i][j]
        })
    }

    /// `v vᵀ`.
    pub fn outer(v: &Vector) -> Self {
        let mut m = Matrix::zeros(v.len());
        m.add_scaled_outer(1.0, v);
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `self += w · v vᵀ`, filling both triangles identically.
    pub fn add_scaled_outer(&mut self, w: f64, v: &Vector) {
        debug_assert_eq!(v.len(), self.dim);
        let n = self.dim;
        for i in 0..n {
            let wi = w * v[i];
            for j in i..n {
                let x = wi * v[j];
                self.data[i * MAX_DIM + j] += x;
                if j != i {
                    self.data[j * MAX_DIM + i] += x;
                }
            }
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        let mut out = *self;
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(i, j)] *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        Matrix::from_fn(self.dim, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `vᵀ A v`.
    pub fn quad_form(&self, v: &Vector) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            let row = &self.data[i * MAX_DIM..i * MAX_DIM + n];
            let inner: f64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            acc += v[i] * inner;
        }
        acc
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// True when `|a_ij - a_ji| <= rel_tol · max(|a_ij|, |a_ji|, tiny)` for every pair.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let (a, b) = (self[(i, j)], self[(j, i)]);
                let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
                if (a - b).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Principal submatrix on the given (ordered) indices.
    pub fn submatrix(&self, indices: &[usize]) -> Matrix {
        Matrix::from_fn(indices.len(), |a, b| self[(indices[a], indices[b])])
    }

    /// Matrix with row `row` and column `col` removed. `None` for a 1×1 matrix.
    pub fn minor_matrix(&self, row: usize, col: usize) -> Option<Matrix> {
        if self.dim == 1 {
            return None;
        }
        let rows: Vec<usize> = (0..self.dim).filter(|&r| r != row).collect();
        let cols: Vec<usize> = (0..self.dim).filter(|&c| c != col).collect();
        Some(Matrix::from_fn(self.dim - 1, |a, b| self[(rows[a], cols[b])]))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self[(i, j)] - other[(i, j)]).abs());
            }
        }
        worst
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)]).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        Matrix::from_fn(n, |i, j| (0..n).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
///
/// Returns exactly zero when a pivot column is identically zero.
pub fn det(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut a = *m;
    let mut sign = 1.0;
    let mut acc = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs()))
            .unwrap_or(c);
        let pivot = a[(p, c)];
        if pivot == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..n {
                let tmp = a[(c, j)];
                a[(c, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            sign = -sign;
        }
        acc *= pivot;
        for r in (c + 1)..n {
            let f = a[(r, c)] / pivot;
            if f != 0.0 {
                for j in c..n {
                    a[(r, j)] -= f * a[(c, j)];
                }
            }
        }
    }
    sign * acc
}

/// Pivots of a symmetric elimination with largest-remaining-diagonal pivoting.
///
/// For a positive semidefinite input every returned pivot is non-negative up to
/// round-off; elimination stops at the first non-positive pivot (remaining
/// pivots are reported as zero).
fn symmetric_pivots(m: &Matrix) -> ([f64; MAX_DIM], usize) {
    let n = m.dim();
    let mut a = *m;
    let mut perm: [usize; MAX_DIM] = [0, 1, 2, 3, 4, 5, 6, 7];
    let mut pivots = [0.0; MAX_DIM];
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[(perm[x], perm[x])].total_cmp(&a[(perm[y], perm[y])]))
            .unwrap_or(c);
        perm.swap(c, p);
        let pc = perm[c];
        let pivot = a[(pc, pc)];
        if !(pivot > 0.0) {
            return (pivots, n);
        }
        pivots[c] = pivot;
        for r in (c + 1)..n {
            let pr = perm[r];
            let f = a[(pr, pc)] / pivot;
            if f == 0.0 {
                continue;
            }
            for &ps in &perm[(c + 1)..n] {
                a[(pr, ps)] -= f * a[(pc, ps)];
            }
        }
    }
    (pivots, n)
}

/// Determinant of a symmetric positive semidefinite matrix; never negative.
pub fn det_psd(m: &Matrix) -> f64 {
    let (pivots, n) = symmetric_pivots(m);
    pivots[..n].iter().product()
}

/// `ln det` of a symmetric positive semidefinite matrix, `-inf` when singular.
pub fn log_det_psd(m: &Matrix) -> f64 {
    let (pivots, n) = symmetric_pivots(m);
    let mut acc = 0.0;
    for &p in &pivots[..n] {
        if !(p > 0.0) {
            return f64::NEG_INFINITY;
        }
        acc += p.ln();
    }
    acc
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when the determinant vanishes or the
/// reciprocal 1-norm condition number is at or below [`RCOND_CUTOFF`].
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    let n = m.dim();
    let mut a = *m;
    let mut inv = Matrix::identity(n);
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs()))
            .unwrap_or(c);
        let pivot = a[(p, c)];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularMatrix(format!("zero pivot in column {c}")));
        }
        if p != c {
            for j in 0..n {
                let t = a[(c, j)];
                a[(c, j)] = a[(p, j)];
                a[(p, j)] = t;
                let t = inv[(c, j)];
                inv[(c, j)] = inv[(p, j)];
                inv[(p, j)] = t;
            }
        }
        let scale = 1.0 / pivot;
        for j in 0..n {
            a[(c, j)] *= scale;
            inv[(c, j)] *= scale;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[(r, c)];
            if f != 0.0 {
                for j in 0..n {
                    a[(r, j)] -= f * a[(c, j)];
                    inv[(r, j)] -= f * inv[(c, j)];
                }
            }
        }
    }
    let rcond = 1.0 / (m.norm1() * inv.norm1());
    if !(rcond > RCOND_CUTOFF) {
        return Err(Error::SingularMatrix(format!(
            "reciprocal condition estimate {rcond:.3e} at or below {RCOND_CUTOFF:e}"
        )));
    }
    Ok(inv)
}

/// Signed cofactor `(-1)^(i+j) · det(minor(i, j))`, zero-based indices.
pub fn cofactor(m: &Matrix, i: usize, j: usize) -> f64 {
    assert!(i < m.dim() && j < m.dim(), "cofactor index out of range");
    let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
    match m.minor_matrix(i, j) {
        Some(minor) => sign * det(&minor),
        None => sign,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd4() -> Matrix {
        let b = Matrix::from_rows(&[
            &[1.0, 0.2, -0.3, 0.5],
            &[0.1, 2.0, 0.4, -0.2],
            &[0.0, 0.3, 1.5, 0.1],
            &[0.2, -0.1, 0.2, 1.2],
        ]);
        (&b * &b.transpose()).add(&Matrix::identity(4).scale(0.5))
    }

    #[test]
    fn det_identity_and_diag() {
        assert_eq!(det(&Matrix::identity(4)), 1.0);
        assert_eq!(det(&Matrix::from_diag(&[2.0, 3.0, 4.0, 5.0])), 120.0);
        assert_eq!(det_psd(&Matrix::from_diag(&[2.0, 3.0, 4.0, 5.0])), 120.0);
    }

    #[test]
    fn det_rank_one_is_zero() {
        let g = Vector::from_slice(&[1.0, 0.5, -2.0, 3.0]);
        let m = Matrix::outer(&g);
        assert!(det(&m).abs() < 1e-12);
        assert_eq!(det_psd(&m), 0.0);
        assert_eq!(log_det_psd(&m), f64::NEG_INFINITY);
    }

    #[test]
    fn det_sign_of_permutation() {
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(det(&m), -1.0);
    }

    #[test]
    fn inverse_cases() {
        assert_eq!(inverse(&Matrix::identity(3)).unwrap(), Matrix::identity(3));
        let inv = inverse(&Matrix::from_diag(&[2.0, 4.0])).unwrap();
        assert_eq!(inv, Matrix::from_diag(&[0.5, 0.25]));
        let a = spd4();
        let prod = &a * &inverse(&a).unwrap();
        assert!(prod.max_abs_diff(&Matrix::identity(4)) < 1e-8);
    }

    #[test]
    fn inverse_rejects_singular() {
        let g = Vector::from_slice(&[1.0, 2.0, 3.0]);
        assert!(matches!(inverse(&Matrix::outer(&g)), Err(Error::SingularMatrix(_))));
        let near = Matrix::from_diag(&[1.0, 1e-15]);
        assert!(inverse(&near).is_err());
    }

    #[test]
    fn cofactor_identity_and_laplace() {
        let id = Matrix::identity(4);
        assert_eq!(cofactor(&id, 0, 0), 1.0);
        assert_eq!(cofactor(&id, 0, 3), 0.0);
        let a = spd4();
        let laplace: f64 = (0..4).map(|j| a[(0, j)] * cofactor(&a, 0, j)).sum();
        assert!((laplace - det(&a)).abs() < 1e-12 * det(&a).abs());
    }

    #[test]
    fn psd_det_matches_lu() {
        let a = spd4();
        assert!((det_psd(&a) - det(&a)).abs() < 1e-12 * det(&a));
        assert!((log_det_psd(&a) - det(&a).ln()).abs() < 1e-12);
    }

    #[test]
    fn quad_form_matches_explicit() {
        let a = spd4();
        let v = Vector::from_slice(&[0.3, -1.0, 2.0, 0.5]);
        let mut expected = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                expected += v[i] * a[(i, j)] * v[j];
            }
        }
        assert!((a.quad_form(&v) - expected).abs() < 1e-12);
    }
}
