//! Null space of the stiffness matrix: one indicator vector per connected
//! component of the kernel graph.

use faer::Mat;

use crate::assembly::LaplacianSystem;
use crate::linalg::{dense, dot};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct Deflation {
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    /// `B z_c` for each component indicator `z_c`.
    pub bz: Vec<Vec<f64>>,
    /// Cholesky factor of `G = Z^T B Z`.
    gram_llt: faer::linalg::solvers::Llt<f64>,
}

impl Deflation {
    pub fn new(sys: &LaplacianSystem) -> Result<Self> {
        let labels = sys.component_labels().to_vec();
        let nc = sys.n_components();
        let n = labels.len();
        let mut sizes = vec![0; nc];
        for &c in &labels {
            sizes[c] += 1;
        }
        let bz: Vec<Vec<f64>> = (0..nc)
            .map(|c| {
                let z: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect();
                sys.apply_mass(&z)
            })
            .collect();
        let gram = Mat::from_fn(nc, nc, |a, b| (0..n).filter(|&i| labels[i] == a).map(|i| bz[b][i]).sum());
        let gram_llt = dense::cholesky(&gram).ok_or_else(|| Error::NumericalFailure {
            message: "mass matrix is not positive definite on the stiffness null space".into(),
            residual_history: vec![],
        })?;
        Ok(Self {
            labels,
            sizes,
            bz,
            gram_llt,
        })
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// `Z^T x`.
    pub fn component_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.count()];
        for (&c, v) in self.labels.iter().zip(x) {
            s[c] += v;
        }
        s
    }

    /// Removes the per-component mean (Euclidean projection off `span Z`).
    pub fn center(&self, x: &mut [f64]) {
        let s = self.component_sums(x);
        for (&c, v) in self.labels.iter().zip(x.iter_mut()) {
            *v -= s[c] / self.sizes[c] as f64;
        }
    }

    /// `G^{-1} (B Z)^T x`.
    fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.bz.iter().map(|b| dot(b, x)).collect();
        dense::solve_llt(&self.gram_llt, &rhs)
    }

    /// `B`-orthogonal projection off `span Z`: `x - Z G^{-1} Z^T B x`.
    pub fn b_project(&self, x: &[f64]) -> Vec<f64> {
        let a = self.coefficients(x);
        x.iter().zip(&self.labels).map(|(v, &c)| v - a[c]).collect()
    }

    /// `S x = B x - B Z G^{-1} Z^T B x` given `B x`.
    pub fn deflate_mass(&self, x: &[f64], bx: &[f64]) -> Vec<f64> {
        let a = self.coefficients(x);
        let mut out = bx.to_vec();
        for (c, ac) in a.iter().enumerate() {
            crate::linalg::axpy(-ac, &self.bz[c], &mut out);
        }
        out
    }

    /// `B`-orthonormal basis of `span Z`.
    pub fn null_basis(&self) -> Vec<Vec<f64>> {
        let nc = self.count();
        // Z C^{-T} with G = C C^T
        let c = self.gram_llt.L().to_owned();
        let mut coeff = Mat::<f64>::identity(nc, nc);
        faer::linalg::triangular_solve::solve_upper_triangular_in_place(
            c.transpose(),
            coeff.as_mut(),
            faer::Par::Seq,
        );
        (0..nc)
            .map(|k| self.labels.iter().map(|&l| coeff[(l, k)]).collect())
            .collect()
    }
}
