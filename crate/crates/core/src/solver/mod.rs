//! Generalized eigenproblem `L u = lambda B u`, the point integral Poisson
//! system and the continuous extensions of their solutions.
//!
//! `B` is in general indefinite, so the pencil is not reduced through a
//! factorization of `B`. Instead the stiffness side is made definite:
//! with `Z` the component indicators (the null space of `L`) and
//! `P = I - Z (Z^T B Z)^{-1} Z^T B`, the nonzero eigenpairs satisfy
//!
//! ```text
//! S v = mu M v,   S = B P,   M = L + sum_c gamma_c z_c z_c^T,
//! ```
//!
//! with `M` positive definite, `lambda = 1 / mu` and `u = P v`. The
//! smallest eigenvalues of the pencil are the largest positive `mu`.

mod deflation;
mod extend;
mod poisson;

use faer::Mat;

use crate::assembly::LaplacianSystem;
use crate::linalg::{dense, dot, lanczos_largest, norm2, LanczosOptions, SymmetricOperator};
use crate::{invalid, Error, Result};

pub(crate) use deflation::Deflation;
pub use extend::{apply_ttn, extend_eigvec, TtnEvaluator};
pub use poisson::{solve_poisson, PoissonSolution};
pub(crate) use poisson::projected_pcg;

/// Largest system solved with a dense generalized eigendecomposition.
pub const DENSE_EIG_LIMIT: usize = 2000;
/// Largest system whose shift-invert step uses a dense Cholesky factor.
pub const DENSE_FACTOR_LIMIT: usize = 4500;
/// Relative gap below which eigenvalues are grouped as one multiplicity.
pub const GROUP_GAP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EigMethod {
    Dense,
    Lanczos,
}

/// Smallest eigenpairs of the pencil, ascending.
#[derive(Clone, Debug)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    /// `B`-orthonormal eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `|L u - lambda B u| / |u|`.
    pub residuals: Vec<f64>,
    /// Diagonal shift added before factoring, zero if none.
    pub regularization_applied: f64,
    pub method: EigMethod,
}

impl EigResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest `|u_i^T B u_j - delta_ij|`.
    pub fn orthonormality_error(&self, sys: &LaplacianSystem) -> f64 {
        let bu: Vec<Vec<f64>> = self.eigenvectors.iter().map(|u| sys.apply_mass(u)).collect();
        let mut worst = 0.0f64;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, b) in bu.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, b) - target).abs());
            }
        }
        worst
    }
}

/// `u^T L u / u^T B u`.
pub fn rayleigh_quotient(sys: &LaplacianSystem, u: &[f64]) -> f64 {
    dot(u, &sys.apply_stiffness(u)) / dot(u, &sys.apply_mass(u))
}

/// Splits ascending eigenvalues into runs whose consecutive gaps are below
/// `GROUP_GAP * (1 + lambda)`.
pub fn group_by_gap(eigenvalues: &[f64]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &lam) in eigenvalues.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if lam - eigenvalues[k - 1] <= GROUP_GAP * (1.0 + lam.abs()) => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

/// Smallest `count` eigenpairs of `L u = lambda B u`.
pub fn solve_eig(sys: &LaplacianSystem, count: usize) -> Result<EigResult> {
    let n = sys.len();
    if count == 0 || count > n {
        return Err(invalid(format!("eigenpair count must lie in 1..={n}, got {count}")));
    }
    let defl = Deflation::new(sys)?;
    let mut vectors: Vec<Vec<f64>> = defl.null_basis().into_iter().take(count).collect();
    let need = count - vectors.len();
    let mut regularization = 0.0;
    let method = if n <= DENSE_EIG_LIMIT {
        EigMethod::Dense
    } else {
        EigMethod::Lanczos
    };
    if need > 0 {
        let (extra, eps) = match method {
            EigMethod::Dense => dense_nonzero_modes(sys, &defl, need)?,
            EigMethod::Lanczos => lanczos_nonzero_modes(sys, &defl, need)?,
        };
        regularization = eps;
        vectors.extend(extra);
    }
    let (eigenvalues, mut eigenvectors) = rayleigh_ritz(sys, &vectors)?;
    for u in eigenvectors.iter_mut() {
        fix_sign(u);
    }
    let residuals = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lam, u)| {
            let lu = sys.apply_stiffness(u);
            let bu = sys.apply_mass(u);
            let r: Vec<f64> = lu.iter().zip(&bu).map(|(a, b)| a - lam * b).collect();
            norm2(&r) / norm2(u)
        })
        .collect();
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
        residuals,
        regularization_applied: regularization,
        method,
    })
}

/// `M = L + sum_c gamma_c z_c z_c^T` with `gamma_c` scaled to the mean
/// diagonal of `L`.
fn shift_weights(sys: &LaplacianSystem, defl: &Deflation) -> Vec<f64> {
    let n = sys.len();
    let trace: f64 = (0..n).map(|i| sys.stiffness(i, i)).sum();
    let mean = if trace > 0.0 { trace / n as f64 } else { 1.0 };
    defl.sizes.iter().map(|&s| mean / s as f64).collect()
}

fn shifted_stiffness(sys: &LaplacianSystem, defl: &Deflation) -> Mat<f64> {
    let gamma = shift_weights(sys, defl);
    let mut m = sys.stiffness_dense();
    let n = sys.len();
    for j in 0..n {
        let cj = defl.labels[j];
        for i in 0..n {
            if defl.labels[i] == cj {
                m[(i, j)] += gamma[cj];
            }
        }
    }
    m
}

/// Cholesky of `M`, retrying once with a diagonal shift.
fn factor_shifted(m: &mut Mat<f64>) -> Result<(faer::linalg::solvers::Llt<f64>, f64)> {
    if let Some(llt) = dense::cholesky(m) {
        return Ok((llt, 0.0));
    }
    let n = m.nrows();
    let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
    let eps = 1e-12 * trace / n as f64;
    for i in 0..n {
        m[(i, i)] += eps;
    }
    dense::cholesky(m).map(|llt| (llt, eps)).ok_or_else(|| Error::NumericalFailure {
        message: format!("shifted stiffness matrix not positive definite after adding {eps:.3e} to the diagonal"),
        residual_history: vec![],
    })
}

/// Keeps the largest positive `mu` and maps `v` to `u = P v / sqrt(mu)`.
fn pick_modes(defl: &Deflation, mus: &[f64], vs: &[Vec<f64>], need: usize) -> Result<Vec<Vec<f64>>> {
    let top = mus.iter().cloned().fold(0.0f64, f64::max);
    let mut order: Vec<usize> = (0..mus.len()).filter(|&k| mus[k] > 1e-12 * top).collect();
    order.sort_by(|&a, &b| mus[b].total_cmp(&mus[a]));
    if order.len() < need {
        return Err(Error::NumericalFailure {
            message: format!("only {} positive eigenvalues available, {need} requested", order.len()),
            residual_history: vec![],
        });
    }
    Ok(order
        .into_iter()
        .take(need)
        .map(|k| {
            let s = mus[k].sqrt();
            defl.b_project(&vs[k]).into_iter().map(|x| x / s).collect()
        })
        .collect())
}

fn dense_nonzero_modes(sys: &LaplacianSystem, defl: &Deflation, need: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = sys.len();
    let mut m = shifted_stiffness(sys, defl);
    let (_, eps) = factor_shifted(&mut m)?;
    let b = sys.mass_dense();
    let mut s = b.clone();
    for j in 0..n {
        let col = dense::column(&b, j);
        let deflated = defl.deflate_mass(&unit(n, j), &col);
        for i in 0..n {
            s[(i, j)] = deflated[i];
        }
    }
    let s = Mat::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let (mus, v) = dense::generalized_eigen(&s, &m)?;
    let vs: Vec<Vec<f64>> = (0..n).map(|k| dense::column(&v, k)).collect();
    Ok((pick_modes(defl, &mus, &vs, need)?, eps))
}

fn unit(n: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[j] = 1.0;
    e
}

/// Solver for `L x = rhs` on the centered subspace (`rhs` orthogonal to
/// `span Z`): a dense Cholesky factor of `M` or projected conjugate
/// gradients.
pub(crate) enum InnerSolve {
    Factor(faer::linalg::solvers::Llt<f64>),
    Iterative,
}

impl InnerSolve {
    /// Picks the dense factor up to `DENSE_FACTOR_LIMIT`; returns the
    /// diagonal shift that was needed, if any.
    pub fn new(sys: &LaplacianSystem, defl: &Deflation) -> Result<(Self, f64)> {
        Self::with(sys, defl, sys.len() <= DENSE_FACTOR_LIMIT)
    }

    pub fn with(sys: &LaplacianSystem, defl: &Deflation, factor: bool) -> Result<(Self, f64)> {
        if factor {
            let mut m = shifted_stiffness(sys, defl);
            let (llt, eps) = factor_shifted(&mut m)?;
            Ok((InnerSolve::Factor(llt), eps))
        } else {
            Ok((InnerSolve::Iterative, 0.0))
        }
    }

    pub fn solve(&self, sys: &LaplacianSystem, defl: &Deflation, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            InnerSolve::Factor(llt) => Ok(dense::solve_llt(llt, rhs)),
            InnerSolve::Iterative => Ok(projected_pcg(sys, defl, rhs, 1e-12, 10 * sys.len())?.0),
        }
    }
}

/// `K = M^{-1} S`, self-adjoint in the `M` inner product.
struct ShiftInvert<'a> {
    sys: &'a LaplacianSystem,
    defl: &'a Deflation,
    inner: InnerSolve,
}

impl SymmetricOperator for ShiftInvert<'_> {
    fn dim(&self) -> usize {
        self.sys.len()
    }

    fn apply(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let sv = self.defl.deflate_mass(v, &self.sys.apply_mass(v));
        // S v is orthogonal to span Z, so M x = S v reduces to L x = S v
        // on the centered subspace.
        let x = self.inner.solve(self.sys, self.defl, &sv)?;
        Ok((x, sv))
    }
}

fn lanczos_nonzero_modes(sys: &LaplacianSystem, defl: &Deflation, need: usize) -> Result<(Vec<Vec<f64>>, f64)> {
    lanczos_modes_with(sys, defl, need, sys.len() <= DENSE_FACTOR_LIMIT)
}

fn lanczos_modes_with(
    sys: &LaplacianSystem,
    defl: &Deflation,
    need: usize,
    factor: bool,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let (inner, eps) = InnerSolve::with(sys, defl, factor)?;
    let op = ShiftInvert { sys, defl, inner };
    let opts = LanczosOptions {
        tol: 1e-10,
        ..Default::default()
    };
    let ritz = lanczos_largest(&op, need, &opts)?;
    Ok((pick_modes(defl, &ritz.values, &ritz.vectors, need)?, eps))
}

/// Rayleigh-Ritz on `span(vectors)`: returns ascending eigenvalues and
/// `B`-orthonormal combinations.
fn rayleigh_ritz(sys: &LaplacianSystem, vectors: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = vectors.len();
    let lu: Vec<Vec<f64>> = vectors.iter().map(|u| sys.apply_stiffness(u)).collect();
    let bu: Vec<Vec<f64>> = vectors.iter().map(|u| sys.apply_mass(u)).collect();
    let a = Mat::from_fn(k, k, |i, j| 0.5 * (dot(&vectors[i], &lu[j]) + dot(&vectors[j], &lu[i])));
    let b = Mat::from_fn(k, k, |i, j| 0.5 * (dot(&vectors[i], &bu[j]) + dot(&vectors[j], &bu[i])));
    let (values, y) = dense::generalized_eigen(&a, &b)?;
    let n = sys.len();
    let out = (0..k)
        .map(|c| {
            let mut u = vec![0.0; n];
            for (r, v) in vectors.iter().enumerate() {
                crate::linalg::axpy(y[(r, c)], v, &mut u);
            }
            u
        })
        .collect();
    Ok((values, out))
}

/// Makes the entry of largest magnitude positive.
fn fix_sign(u: &mut [f64]) {
    let mut best = 0.0f64;
    for &x in u.iter() {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests;
