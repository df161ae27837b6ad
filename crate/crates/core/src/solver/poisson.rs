use super::Deflation;
use crate::assembly::LaplacianSystem;
use crate::linalg::{axpy, dot, norm2};
use crate::{invalid, Error, Result};

/// Solution of `(1/n) L u = b`, `b = (1/n) B f` projected onto `range(L)`.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    /// Mean-zero on every connected component.
    pub u: Vec<f64>,
    pub rhs_projection_applied: bool,
    pub iterations: usize,
    /// `|(1/n) L u - b| / |b|` for the projected `b`.
    pub residual: f64,
    /// The projected right-hand side.
    pub rhs: Vec<f64>,
}

/// Relative residual at which the conjugate-gradient iteration stops.
pub const POISSON_TOLERANCE: f64 = 1e-11;

pub fn solve_poisson(sys: &LaplacianSystem, f: &[f64]) -> Result<PoissonSolution> {
    let n = sys.len();
    if f.len() != n {
        return Err(invalid(format!("right-hand side has length {}, expected {n}", f.len())));
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(invalid("right-hand side must be finite"));
    }
    let defl = Deflation::new(sys)?;
    let inv_n = 1.0 / n as f64;
    let mut b: Vec<f64> = sys.apply_mass(f).into_iter().map(|x| x * inv_n).collect();
    let before = norm2(&b);
    let original = b.clone();
    defl.center(&mut b);
    let removed: f64 = original.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let rhs_projection_applied = removed > 1e-14 * before;

    let bnorm = norm2(&b);
    if bnorm == 0.0 {
        return Ok(PoissonSolution {
            u: vec![0.0; n],
            rhs_projection_applied,
            iterations: 0,
            residual: 0.0,
            rhs: b,
        });
    }
    let scaled: Vec<f64> = b.iter().map(|x| x * n as f64).collect();
    let (u, iterations, _) = projected_pcg(sys, &defl, &scaled, POISSON_TOLERANCE, 10 * n)?;
    let lu = sys.apply_stiffness(&u);
    let r: Vec<f64> = lu.iter().zip(&b).map(|(l, b)| l * inv_n - b).collect();
    Ok(PoissonSolution {
        u,
        rhs_projection_applied,
        iterations,
        residual: norm2(&r) / bnorm,
        rhs: b,
    })
}

/// Jacobi-preconditioned conjugate gradients for `L x = rhs` on the space of
/// vectors with zero mean on every component. `rhs` must lie in that space.
///
/// Returns the centered solution, the iteration count and the relative
/// residual history.
pub(crate) fn projected_pcg(
    sys: &LaplacianSystem,
    defl: &Deflation,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let n = sys.len();
    let rnorm0 = norm2(rhs);
    let mut x = vec![0.0; n];
    if rnorm0 == 0.0 {
        return Ok((x, 0, vec![0.0]));
    }
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = sys.stiffness(i, i);
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let precondition = |r: &[f64]| {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
        defl.center(&mut z);
        z
    };
    let mut r = rhs.to_vec();
    defl.center(&mut r);
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut history = vec![1.0];
    for it in 1..=max_iter {
        let ap = sys.apply_stiffness(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NumericalFailure {
                message: format!("conjugate gradients broke down at iteration {it} (p^T L p = {pap:.3e})"),
                residual_history: history,
            });
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        defl.center(&mut x);
        defl.center(&mut r);
        let mut rel = norm2(&r) / rnorm0;
        if rel <= tol || it % 50 == 0 {
            // refresh against the true residual
            let lx = sys.apply_stiffness(&x);
            r = rhs.iter().zip(&lx).map(|(b, l)| b - l).collect();
            defl.center(&mut r);
            rel = norm2(&r) / rnorm0;
        }
        history.push(rel);
        if rel <= tol {
            return Ok((x, it, history));
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    Err(Error::NumericalFailure {
        message: format!("conjugate gradients did not converge in {max_iter} iterations"),
        residual_history: history,
    })
}
