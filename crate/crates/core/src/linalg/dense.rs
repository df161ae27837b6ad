//! Dense helpers on top of `faer`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::{Error, Result};

/// Runs all dense kernels on the calling thread. Results then do not depend
/// on the worker count.
pub fn use_single_thread() {
    faer::set_global_parallelism(faer::Par::Seq);
}

pub fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut y = vec![0.0; n];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let col = a.col_as_slice(j);
        y.iter_mut().zip(col).for_each(|(y, a)| *y += a * xj);
    }
    y
}

pub fn column(a: &Mat<f64>, j: usize) -> Vec<f64> {
    a.col_as_slice(j).to_vec()
}

/// Copies column vectors into a matrix.
pub fn from_columns(cols: &[Vec<f64>], nrows: usize) -> Mat<f64> {
    Mat::from_fn(nrows, cols.len(), |i, j| cols[j][i])
}

/// Cholesky factorization; `None` when the matrix is not positive definite.
pub fn cholesky(a: &Mat<f64>) -> Option<faer::linalg::solvers::Llt<f64>> {
    a.llt(Side::Lower).ok()
}

pub fn solve_llt(llt: &faer::linalg::solvers::Llt<f64>, b: &[f64]) -> Vec<f64> {
    let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    llt.solve_in_place(&mut rhs);
    column(&rhs, 0)
}

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::NumericalFailure {
        message: format!("symmetric eigendecomposition failed: {e:?}"),
        residual_history: vec![],
    })?;
    let s = evd.S().column_vector();
    let values = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Solves `A x = theta B x` for symmetric `A` and positive-definite `B`.
///
/// Eigenvalues ascend; eigenvectors are `B`-orthonormal.
pub fn generalized_eigen(a: &Mat<f64>, b: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let llt = cholesky(b).ok_or_else(|| Error::NumericalFailure {
        message: "right-hand matrix of the projected pencil is not positive definite".into(),
        residual_history: vec![],
    })?;
    let g = llt.L().to_owned();
    let par = faer::get_global_parallelism();
    // C = G^{-1} A G^{-T}
    let mut c = a.clone();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(g.as_ref(), c.as_mut(), par);
    let mut ct = c.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(g.as_ref(), ct.as_mut(), par);
    let sym = Mat::from_fn(ct.nrows(), ct.ncols(), |i, j| 0.5 * (ct[(i, j)] + ct[(j, i)]));
    let (values, mut y) = symmetric_eigen(&sym)?;
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(g.transpose(), y.as_mut(), par);
    Ok((values, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generalized_pencil_small() {
        let a = Mat::from_fn(2, 2, |i, j| [[2.0, 1.0], [1.0, 2.0]][i][j]);
        let b = Mat::from_fn(2, 2, |i, j| [[2.0, 0.0], [0.0, 1.0]][i][j]);
        let (vals, vecs) = generalized_eigen(&a, &b).unwrap();
        // det(A - t B) = (2-2t)(2-t) - 1 = 2t^2 - 6t + 3
        let disc = (36.0f64 - 24.0).sqrt();
        assert!((vals[0] - (6.0 - disc) / 4.0).abs() < 1e-13);
        assert!((vals[1] - (6.0 + disc) / 4.0).abs() < 1e-13);
        for k in 0..2 {
            let v = column(&vecs, k);
            let bv = matvec(&b, &v);
            assert!((crate::linalg::dot(&v, &bv) - 1.0).abs() < 1e-13);
        }
    }
}
