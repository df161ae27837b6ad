//! Error measurement against reference spectra, discrepancy of the
//! empirical measure over the kernel class, coercivity of the discrete
//! Dirichlet form and power-law rate fits.

mod angle;
mod coercivity;
mod discrepancy;
mod fit;
mod sweep;

pub use angle::{principal_angle, subspace_angle};
pub use coercivity::coercivity_constant;
pub use discrepancy::{discrepancy, discrepancy_against, DEFAULT_CENTERS, DEFAULT_QUADRATURE_NODES};
pub use fit::{fit_power_law, PowerLawFit};
pub use sweep::{eig_error_table, CellResult, CellSummary, Schedule, SpectralReport, SweepGrid, SweepOptions, T_MAX};

use crate::assembly::LaplacianSystem;
use crate::linalg::dot;
use crate::{invalid, Result};

/// `u^T L u / u^T B u`.
pub fn rayleigh(sys: &LaplacianSystem, u: &[f64]) -> Result<f64> {
    if u.len() != sys.len() {
        return Err(invalid(format!("vector has length {}, expected {}", u.len(), sys.len())));
    }
    let ubu = dot(u, &sys.apply_mass(u));
    if !(ubu > 0.0) {
        return Err(invalid(format!("u^T B u = {ubu:.3e} is not positive")));
    }
    Ok(dot(u, &sys.apply_stiffness(u)) / ubu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble;
    use crate::geometry::{sample, DensitySpec, ManifoldModel};
    use crate::kernel::KernelSpec;
    use crate::linalg::dense;
    use crate::solver::solve_eig;
    use rand::{Rng, SeedableRng};

    #[test]
    fn rayleigh_of_constant_and_eigenvectors() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::uniform(&m).unwrap();
        let sys = assemble(&sample(&m, &d, 200, 5).unwrap(), &KernelSpec::wendland41(), 0.01).unwrap();
        assert_eq!(rayleigh(&sys, &vec![1.0; 200]).unwrap(), 0.0);
        let eig = solve_eig(&sys, 4).unwrap();
        for (lam, u) in eig.eigenvalues.iter().zip(&eig.eigenvectors).skip(1) {
            assert!((rayleigh(&sys, u).unwrap() - lam).abs() <= 1e-8 * lam);
        }
        assert!(rayleigh(&sys, &vec![0.0; 200]).is_err());
        assert!(rayleigh(&sys, &[1.0; 3]).is_err());
    }

    #[test]
    fn rayleigh_bounds_from_the_spectrum() {
        let m = ManifoldModel::Circle { radius: 1.0 };
        let d = DensitySpec::uniform(&m).unwrap();
        let sys = assemble(&sample(&m, &d, 200, 8).unwrap(), &KernelSpec::wendland41(), 0.05).unwrap();
        // full nonnegative spectrum from the dense definite reduction
        let eig = solve_eig(&sys, 12).unwrap();
        let lam1 = eig.eigenvalues[1];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let one = vec![1.0; 200];
        let b1 = sys.apply_mass(&one);
        let c = dot(&one, &b1);
        for _ in 0..20 {
            // B-orthogonal to constants: quotient at least lambda_1
            let mut u: Vec<f64> = (0..200).map(|_| rng.random::<f64>() - 0.5).collect();
            let a = dot(&u, &b1) / c;
            u.iter_mut().for_each(|x| *x -= a);
            if let Ok(q) = rayleigh(&sys, &u) {
                assert!(q >= lam1 * (1.0 - 1e-9), "{q} < {lam1}");
            }
            // combinations of computed eigenvectors stay inside their range
            let w: Vec<f64> = (0..12).map(|_| rng.random::<f64>() - 0.5).collect();
            let mut v = vec![0.0; 200];
            for (wk, uk) in w.iter().zip(&eig.eigenvectors) {
                crate::linalg::axpy(*wk, uk, &mut v);
            }
            let q = rayleigh(&sys, &v).unwrap();
            assert!(q >= -1e-9 && q <= eig.eigenvalues[11] * (1.0 + 1e-9));
        }
        // the dense mass matrix itself has negative eigenvalues
        let (bvals, _) = dense::symmetric_eigen(&sys.mass_dense()).unwrap();
        assert!(bvals[0] < 0.0);
    }
}
