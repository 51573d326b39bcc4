//! Small dense-matrix helpers shared by the model and the filters.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Builds a matrix from row lists, as they appear in config files.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::dim(format!("row {}", i + 1), ncols, row.len()));
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn symmetrize(p: &Matrix) -> Matrix {
    (p + p.transpose()) * 0.5
}

pub fn is_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub fn max_asymmetry(m: &Matrix) -> f64 {
    (m - m.transpose()).amax()
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn is_symmetric_psd(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_asymmetry(m) <= tol && min_eigenvalue(m) >= -tol
}

pub fn is_symmetric_pd(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_asymmetry(m) <= tol && Cholesky::new(symmetrize(m)).is_some()
}

pub fn cholesky(m: &Matrix, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(m))
        .ok_or_else(|| Error::Numerical(format!("{what} is not positive definite")))
}

/// Block matrix `[[tl, tr], [bl, br]]`.
pub fn block2(tl: &Matrix, tr: &Matrix, bl: &Matrix, br: &Matrix) -> Matrix {
    let (r0, c0) = tl.shape();
    let (r1, c1) = br.shape();
    let mut out = Matrix::zeros(r0 + r1, c0 + c1);
    out.view_mut((0, 0), (r0, c0)).copy_from(tl);
    out.view_mut((0, c0), (r0, c1)).copy_from(tr);
    out.view_mut((r0, 0), (r1, c0)).copy_from(bl);
    out.view_mut((r0, c0), (r1, c1)).copy_from(br);
    out
}

/// Vertical stack `[top; bottom]`.
pub fn vstack(top: &Matrix, bottom: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    out
}
