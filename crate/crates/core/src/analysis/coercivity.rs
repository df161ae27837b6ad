use crate::assembly::LaplacianSystem;
use crate::linalg::{lanczos_largest, LanczosOptions, SymmetricOperator};
use crate::solver::{Deflation, InnerSolve};
use crate::Result;

/// `min (C_t / n^2 t) sum_ij R_ij (u_i - u_j)^2 / ((1/n) sum_i u_i^2)` over
/// mean-zero `u`, i.e. `(2 C_t / n)` times the smallest nonzero eigenvalue
/// of `L`. Zero for disconnected systems.
pub fn coercivity_constant(sys: &LaplacianSystem) -> Result<f64> {
    if sys.disconnected() || sys.len() < 2 {
        return Ok(0.0);
    }
    Ok(2.0 * sys.normalization_constant() / sys.len() as f64 * smallest_nonzero_stiffness_eigenvalue(sys)?)
}

/// `L^+` on the mean-zero subspace, Euclidean inner product.
struct PseudoInverse<'a> {
    sys: &'a LaplacianSystem,
    defl: &'a Deflation,
    inner: InnerSolve,
}

impl SymmetricOperator for PseudoInverse<'_> {
    fn dim(&self) -> usize {
        self.sys.len()
    }

    fn apply(&self, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut c = v.to_vec();
        self.defl.center(&mut c);
        let mut x = self.inner.solve(self.sys, self.defl, &c)?;
        self.defl.center(&mut x);
        Ok((x.clone(), x))
    }
}

fn smallest_nonzero_stiffness_eigenvalue(sys: &LaplacianSystem) -> Result<f64> {
    let defl = Deflation::new(sys)?;
    let (inner, _) = InnerSolve::new(sys, &defl)?;
    let op = PseudoInverse { sys, defl: &defl, inner };
    let ritz = lanczos_largest(&op, 1, &LanczosOptions::default())?;
    Ok(1.0 / ritz.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, normalization_constant};
    use crate::geometry::{sample, DensitySpec, ManifoldModel, PointCloud};
    use crate::kernel::KernelSpec;
    use crate::linalg::dense;

    fn interval(n: usize, t: f64, seed: u64) -> LaplacianSystem {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::uniform(&m).unwrap();
        assemble(&sample(&m, &d, n, seed).unwrap(), &KernelSpec::wendland41(), t).unwrap()
    }

    #[test]
    fn disconnected_pair_is_zero() {
        let m = ManifoldModel::Interval { a: 0.0, b: 10.0 };
        let d = DensitySpec::uniform(&m).unwrap();
        let c = PointCloud::from_points(m, vec![[0.0; 3], [10.0, 0.0, 0.0]], &d, 0).unwrap();
        let sys = assemble(&c, &KernelSpec::wendland41(), 0.01).unwrap();
        assert_eq!(coercivity_constant(&sys).unwrap(), 0.0);
    }

    #[test]
    fn matches_dense_deflated_eigensolve() {
        let n = 500;
        let t = 0.02;
        let sys = interval(n, t, 1);
        let got = coercivity_constant(&sys).unwrap();
        // deflate constants explicitly: Q^T L Q with Q an orthonormal basis
        // of the mean-zero subspace (Householder reflection of e_1 onto 1/sqrt(n))
        let l = sys.stiffness_dense();
        let s = 1.0 / (n as f64).sqrt();
        let mut v = vec![s; n];
        v[0] -= 1.0;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let h = faer::Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vv);
        let hlh = &h * &l * &h;
        let sub = faer::Mat::from_fn(n - 1, n - 1, |i, j| hlh[(i + 1, j + 1)]);
        let (vals, _) = dense::symmetric_eigen(&sub).unwrap();
        let expect = 2.0 * normalization_constant(t, 1) / n as f64 * vals[0];
        assert!((got - expect).abs() <= 1e-8 * expect, "{got} vs {expect}");
    }

    #[test]
    fn positive_and_stable_across_seeds() {
        let vals: Vec<f64> = (1..=5).map(|s| coercivity_constant(&interval(500, 0.02, s)).unwrap()).collect();
        let max = vals.iter().cloned().fold(0.0, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
        assert!(max / min <= 2.0, "{vals:?}");
    }

    #[test]
    fn scales_linearly_with_kernel() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::uniform(&m).unwrap();
        let c = sample(&m, &d, 300, 4).unwrap();
        let a = coercivity_constant(&assemble(&c, &KernelSpec::wendland41(), 0.02).unwrap()).unwrap();
        let b = coercivity_constant(&assemble(&c, &KernelSpec::wendland41().scaled(2.5), 0.02).unwrap()).unwrap();
        assert!((b - 2.5 * a).abs() <= 1e-8 * b);
    }
}
