//! Lanczos iteration with full reorthogonalization in a general inner
//! product `<x, y> = x^T G y`.
//!
//! The operator is supplied together with its Gram matrix so that callers
//! can run shift-invert iterations of the form `K = A^{-1} S`, which are
//! self-adjoint in the `A` inner product, without ever forming `A v`
//! separately: `A (K v) = S v`.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{axpy, dense, dot};
use crate::{Error, Result};

/// Operator `K` that is self-adjoint in the inner product defined by `G`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// Returns `(K v, G K v)`.
    fn apply(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>;
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub max_basis: usize,
    /// Relative Ritz residual accepted for convergence.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_basis: 400,
            tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

/// Converged Ritz pairs, largest first.
#[derive(Clone, Debug)]
pub struct RitzPairs {
    pub values: Vec<f64>,
    /// `G`-orthonormal Ritz vectors.
    pub vectors: Vec<Vec<f64>>,
    /// `G` applied to each Ritz vector.
    pub gram_vectors: Vec<Vec<f64>>,
    pub residual_estimates: Vec<f64>,
    pub iterations: usize,
}

/// Largest `want` eigenvalues of `op`.
pub fn lanczos_largest(op: &dyn SymmetricOperator, want: usize, opts: &LanczosOptions) -> Result<RitzPairs> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    // One application maps the start vector into the range of K.
    let (mut v, mut gv) = op.apply(&start)?;
    let nrm = dot(&v, &gv).max(0.0).sqrt();
    if !(nrm > 0.0) {
        return Ok(RitzPairs {
            values: vec![],
            vectors: vec![],
            gram_vectors: vec![],
            residual_estimates: vec![],
            iterations: 0,
        });
    }
    v.iter_mut().for_each(|x| *x /= nrm);
    gv.iter_mut().for_each(|x| *x /= nrm);

    let max_basis = opts.max_basis.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut gbasis: Vec<Vec<f64>> = vec![gv];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history = Vec::new();

    loop {
        let j = basis.len() - 1;
        let (mut w, mut gw) = op.apply(&basis[j])?;
        let a = dot(&gbasis[j], &w);
        alpha.push(a);
        for _ in 0..2 {
            for (q, gq) in basis.iter().zip(&gbasis) {
                let c = dot(gq, &w);
                axpy(-c, q, &mut w);
                axpy(-c, gq, &mut gw);
            }
        }
        let b = dot(&w, &gw).max(0.0).sqrt();
        let m = alpha.len();
        let exhausted = b <= 1e-14 * alpha.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) || m >= max_basis;

        if m >= want && (m % 5 == 0 || exhausted) {
            let (theta, y) = ritz(&alpha, &beta)?;
            let scale = theta.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
            let top: Vec<usize> = (0..m).rev().take(want).collect();
            let res: Vec<f64> = top.iter().map(|&k| (b * y[(m - 1, k)]).abs()).collect();
            let worst = top
                .iter()
                .zip(&res)
                .map(|(&k, r)| r / theta[k].abs().max(1e-8 * scale))
                .fold(0.0, f64::max);
            history.push(worst);
            if worst <= opts.tol || exhausted {
                if worst > opts.tol.sqrt() && !(b <= 1e-14 * scale) {
                    return Err(Error::NumericalFailure {
                        message: format!("Lanczos did not converge within {m} vectors"),
                        residual_history: history,
                    });
                }
                let mut out = RitzPairs {
                    values: Vec::with_capacity(want),
                    vectors: Vec::with_capacity(want),
                    gram_vectors: Vec::with_capacity(want),
                    residual_estimates: res,
                    iterations: m,
                };
                for &k in &top {
                    let mut x = vec![0.0; n];
                    let mut gx = vec![0.0; n];
                    for i in 0..m {
                        axpy(y[(i, k)], &basis[i], &mut x);
                        axpy(y[(i, k)], &gbasis[i], &mut gx);
                    }
                    out.values.push(theta[k]);
                    out.vectors.push(x);
                    out.gram_vectors.push(gx);
                }
                return Ok(out);
            }
        }
        if exhausted {
            // fewer than `want` directions available
            let (theta, y) = ritz(&alpha, &beta)?;
            let mut out = RitzPairs {
                values: vec![],
                vectors: vec![],
                gram_vectors: vec![],
                residual_estimates: vec![],
                iterations: m,
            };
            for k in (0..m).rev() {
                let mut x = vec![0.0; n];
                let mut gx = vec![0.0; n];
                for i in 0..m {
                    axpy(y[(i, k)], &basis[i], &mut x);
                    axpy(y[(i, k)], &gbasis[i], &mut gx);
                }
                out.values.push(theta[k]);
                out.vectors.push(x);
                out.gram_vectors.push(gx);
                out.residual_estimates.push((b * y[(m - 1, k)]).abs());
            }
            return Ok(out);
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        gw.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
        gbasis.push(gw);
    }
}

fn ritz(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alpha.len();
    let t = Mat::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    dense::symmetric_eigen(&t)
}
