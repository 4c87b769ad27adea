//! Dense factorization primitives: compact and truncated SVD, pseudoinverses,
//! numerical rank and thin QR.
//!
//! Matrices are nalgebra matrices; the SVD and symmetric eigensolver run in
//! faer, whose SVD stays accurate on rank-deficient input where nalgebra's
//! does not. Rank decisions are always relative
//! to the largest singular value; the default threshold is
//! `max(rows, cols) * f64::EPSILON`.

use faer::{MatRef, Side};
use nalgebra::{DMatrix, QR};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Singular values below this fraction of the largest are never inverted by
/// [`rank_r_pinv`].
pub const PINV_FLOOR: f64 = 1e-14;

/// Compact singular value decomposition `m = left * diag(s) * right^T`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// Left singular vectors, one per retained triple.
    pub left: Matrix,
    /// Retained singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Right singular vectors, one per retained triple.
    pub right: Matrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.left.clone();
        for (mut col, &s) in scaled.column_iter_mut().zip(&self.singular_values) {
            col *= s;
        }
        scaled * self.right.transpose()
    }

    fn truncate(mut self, r: usize) -> Self {
        let r = r.min(self.rank());
        self.singular_values.truncate(r);
        self.left = self.left.columns(0, r).into_owned();
        self.right = self.right.columns(0, r).into_owned();
        self
    }
}

/// Pseudoinverse of a best rank-`r` approximation, with the rank actually used.
#[derive(Debug, Clone)]
pub struct TruncatedPinv {
    pub matrix: Matrix,
    pub rank: usize,
}

pub fn default_tolerance(m: &Matrix) -> f64 {
    m.nrows().max(m.ncols()) as f64 * f64::EPSILON
}

fn check_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Full thin SVD, singular values sorted in nonincreasing order.
fn thin_svd(m: &Matrix) -> Result<SvdFactors> {
    check_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(SvdFactors {
            left: Matrix::zeros(rows, 0),
            singular_values: Vec::new(),
            right: Matrix::zeros(cols, 0),
        });
    }
    let svd = as_faer(m).thin_svd().map_err(|_| Error::NoConvergence("svd"))?;
    let s = svd.S().column_vector();
    Ok(SvdFactors {
        left: from_faer(svd.U()),
        singular_values: (0..s.nrows()).map(|j| s[j]).collect(),
        right: from_faer(svd.V()),
    })
}

fn as_faer(m: &Matrix) -> MatRef<'_, f64> {
    MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn from_faer(m: MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let mut s = as_faer(m).singular_values().map_err(|_| Error::NoConvergence("svd"))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn count_above(s: &[f64], tol: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().take_while(|&&v| v > tol * s1).count(),
        _ => 0,
    }
}

/// Compact SVD keeping exactly the triples with `s_j > tol * s_1`.
///
/// `tol` is relative; `None` selects [`default_tolerance`]. The zero matrix
/// yields empty factors.
pub fn compact_svd(m: &Matrix, tol: Option<f64>) -> Result<SvdFactors> {
    let tol = tol.unwrap_or_else(|| default_tolerance(m));
    let full = thin_svd(m)?;
    let r = count_above(&full.singular_values, tol);
    Ok(full.truncate(r))
}

/// Leading `r` singular triples (fewer if the matrix is smaller).
pub fn truncated_svd(m: &Matrix, r: usize) -> Result<SvdFactors> {
    Ok(thin_svd(m)?.truncate(r))
}

pub fn numerical_rank(m: &Matrix, tol: Option<f64>) -> Result<usize> {
    let tol = tol.unwrap_or_else(|| default_tolerance(m));
    Ok(count_above(&singular_values(m)?, tol))
}

pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// `1 / s_r(m)`, the spectral norm of the pseudoinverse of a matrix of rank
/// `r`. Infinite when `m` has fewer than `r` nonzero singular values.
pub fn pinv_spectral_norm(m: &Matrix, r: usize) -> Result<f64> {
    if r == 0 {
        return Ok(0.0);
    }
    let s = singular_values(m)?;
    Ok(match s.get(r - 1) {
        Some(&v) if v > 0.0 => 1.0 / v,
        _ => f64::INFINITY,
    })
}

fn invert_factors(f: &SvdFactors) -> Matrix {
    let mut v = f.right.clone();
    for (mut col, &s) in v.column_iter_mut().zip(&f.singular_values) {
        col /= s;
    }
    v * f.left.transpose()
}

/// Moore-Penrose pseudoinverse, discarding singular values `<= tol * s_1`.
pub fn pinv(m: &Matrix, tol: Option<f64>) -> Result<Matrix> {
    let f = compact_svd(m, tol)?;
    if f.rank() == 0 {
        return Ok(Matrix::zeros(m.ncols(), m.nrows()));
    }
    Ok(invert_factors(&f))
}

/// Pseudoinverse of the best rank-`r` approximation of `m`.
///
/// When fewer than `r` singular values exceed `PINV_FLOOR * s_1` the
/// effective rank is reduced accordingly and reported in the result.
pub fn rank_r_pinv(m: &Matrix, r: usize) -> Result<TruncatedPinv> {
    let full = thin_svd(m)?;
    let rank = count_above(&full.singular_values, PINV_FLOOR).min(r);
    let f = full.truncate(rank);
    let matrix = if rank == 0 {
        Matrix::zeros(m.ncols(), m.nrows())
    } else {
        invert_factors(&f)
    };
    Ok(TruncatedPinv { matrix, rank })
}

/// Thin QR: `q` has `min(rows, cols)` orthonormal columns, `r` is upper
/// triangular.
pub fn qr_factor(m: &Matrix) -> Result<(Matrix, Matrix)> {
    check_finite(m)?;
    let (q, r) = QR::new(m.clone()).unpack();
    Ok((q, r))
}

/// Leading `r` eigenpairs of a symmetric positive semidefinite Gram matrix
/// `x x^T`, returned as left singular vectors of `x` with their singular
/// values.
pub fn leading_from_gram(gram: Matrix, r: usize) -> Result<(Matrix, Vec<f64>)> {
    check_finite(&gram)?;
    let n = gram.nrows();
    let eig = as_faer(&gram)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence("symmetric eigendecomposition"))?;
    // Eigenvalues come back nondecreasing.
    let (vals, vecs) = (eig.S().column_vector(), eig.U());
    let r = r.min(n);
    let mut w = Matrix::zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for c in 0..r {
        let j = n - 1 - c;
        for i in 0..n {
            w[(i, c)] = vecs[(i, j)];
        }
        s.push(vals[j].max(0.0).sqrt());
    }
    Ok((w, s))
}

/// Leading `r` left singular vectors of `m`, computed through its Gram
/// matrix so a full basis is available even when `r` exceeds `m`'s rank.
pub fn leading_left_singular_vectors(m: &Matrix, r: usize) -> Result<(Matrix, Vec<f64>)> {
    check_finite(m)?;
    leading_from_gram(m * m.transpose(), r)
}

/// `||w^T w - I||_max`.
pub fn orthonormality_residual(w: &Matrix) -> f64 {
    let g = w.transpose() * w;
    (g - Matrix::identity(w.ncols(), w.ncols())).amax()
}
