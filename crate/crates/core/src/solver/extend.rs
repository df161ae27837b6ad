use super::{solve_poisson, PoissonSolution};
use crate::assembly::LaplacianSystem;
use crate::geometry::Point;
use crate::{invalid, Error, Result};

/// Evaluates `T_{t,n} f` at arbitrary points:
///
/// ```text
/// T f(x) = (sum_j R(x, x_j) u_j + t sum_j bar-R(x, x_j) f_j) / sum_j R(x, x_j)
/// ```
///
/// where `u` solves the Poisson system for `f`. The `(4 pi t)^{-k/2}`
/// factors of `w_{t,n}` and the kernels cancel.
pub struct TtnEvaluator<'a> {
    sys: &'a LaplacianSystem,
    f: Vec<f64>,
    solution: PoissonSolution,
}

impl<'a> TtnEvaluator<'a> {
    pub fn new(sys: &'a LaplacianSystem, f: &[f64]) -> Result<Self> {
        let solution = solve_poisson(sys, f)?;
        Ok(Self {
            sys,
            f: f.to_vec(),
            solution,
        })
    }

    pub fn solution(&self) -> &PoissonSolution {
        &self.solution
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        let mut den = 0.0;
        let mut num = 0.0;
        let t = self.sys.t();
        for (j, r, bar) in self.sys.kernel_terms_at(x) {
            den += r;
            num += r * self.solution.u[j] + t * bar * self.f[j];
        }
        if den > 0.0 {
            Ok(num / den)
        } else {
            Err(Error::OutOfSupport)
        }
    }
}

/// `T_{t,n} f` at a single query point.
pub fn apply_ttn(sys: &LaplacianSystem, f: &[f64], x: &Point) -> Result<f64> {
    TtnEvaluator::new(sys, f)?.eval(x)
}

/// Continuous extension of a discrete eigenvector:
///
/// ```text
/// I(u)(x) = (lambda t sum_j bar-R(x, x_j) u_j + sum_j R(x, x_j) u_j) / sum_j R(x, x_j)
/// ```
///
/// which reproduces `u_j` at every sample when `L u = lambda B u`.
pub fn extend_eigvec(sys: &LaplacianSystem, u: &[f64], lambda: f64, x: &Point) -> Result<f64> {
    if u.len() != sys.len() {
        return Err(invalid(format!("eigenvector has length {}, expected {}", u.len(), sys.len())));
    }
    let t = sys.t();
    let mut den = 0.0;
    let mut num = 0.0;
    for (j, r, bar) in sys.kernel_terms_at(x) {
        den += r;
        num += lambda * t * bar * u[j] + r * u[j];
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(Error::OutOfSupport)
    }
}
