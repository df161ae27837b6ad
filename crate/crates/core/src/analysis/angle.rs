use std::f64::consts::FRAC_1_SQRT_2;

use faer::Mat;

use crate::assembly::LaplacianSystem;
use crate::geometry::ReferenceSpectrum;
use crate::linalg::{dense, dot};
use crate::solver::{group_by_gap, EigResult};
use crate::{invalid, Error, Result};

/// Largest principal angle between `span(a)` and `span(b)` in the
/// `B` inner product.
pub fn principal_angle(sys: &LaplacianSystem, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MultiplicityMismatch {
            discrete: a.len(),
            reference: b.len(),
        });
    }
    let k = a.len();
    if k == 0 {
        return Err(invalid("principal angle of empty subspaces"));
    }
    let qa = orthonormalize(sys, a)?;
    let qb = orthonormalize(sys, b)?;
    // cosines are the singular values of C = Qb^T B Qa
    let c = Mat::from_fn(k, k, |i, j| dot(&qb.0[i], &qa.1[j]));
    let ctc = Mat::from_fn(k, k, |i, j| (0..k).map(|r| c[(r, i)] * c[(r, j)]).sum::<f64>());
    let (s2, _) = dense::symmetric_eigen(&ctc)?;
    let smin = s2[0].max(0.0).sqrt().min(1.0);
    if smin < FRAC_1_SQRT_2 {
        return Ok(smin.acos());
    }
    // Small angles: sines from the residual Qa - Qb C, which avoids 1 - cos^2 cancellation.
    let n = a[0].len();
    let (r, br): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..k)
        .map(|j| {
            let mut r = qa.0[j].clone();
            let mut br = qa.1[j].clone();
            for i in 0..k {
                let w = c[(i, j)];
                for p in 0..n {
                    r[p] -= w * qb.0[i][p];
                    br[p] -= w * qb.1[i][p];
                }
            }
            (r, br)
        })
        .unzip();
    let g = Mat::from_fn(k, k, |i, j| 0.5 * (dot(&r[i], &br[j]) + dot(&r[j], &br[i])));
    let (sin2, _) = dense::symmetric_eigen(&g)?;
    Ok(sin2[k - 1].max(0.0).sqrt().min(FRAC_1_SQRT_2).asin())
}

/// `B`-orthonormal basis of `span(v)` and its image under `B`.
fn orthonormalize(sys: &LaplacianSystem, v: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let k = v.len();
    let bv: Vec<Vec<f64>> = v.iter().map(|x| sys.apply_mass(x)).collect();
    let l = gram_factor(v, &bv)?;
    // Q = V L^{-T}: forward substitution over columns
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut bq: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut x = v[j].clone();
        let mut bx = bv[j].clone();
        for i in 0..j {
            let w = l[(j, i)];
            for p in 0..x.len() {
                x[p] -= w * q[i][p];
                bx[p] -= w * bq[i][p];
            }
        }
        let d = l[(j, j)];
        x.iter_mut().for_each(|e| *e /= d);
        bx.iter_mut().for_each(|e| *e /= d);
        q.push(x);
        bq.push(bx);
    }
    Ok((q, bq))
}

fn gram_factor(v: &[Vec<f64>], bv: &[Vec<f64>]) -> Result<Mat<f64>> {
    let k = v.len();
    let g = Mat::from_fn(k, k, |i, j| 0.5 * (dot(&v[i], &bv[j]) + dot(&v[j], &bv[i])));
    let llt = dense::cholesky(&g).ok_or_else(|| Error::NumericalFailure {
        message: "basis is not B-positive definite".into(),
        residual_history: vec![],
    })?;
    Ok(llt.L().to_owned())
}

/// Largest principal angle between the discrete eigenvectors of `group` and
/// the reference eigenfunctions of the same indices sampled at the points.
///
/// The reference multiplicity is the reference eigenvalue cluster (by gap)
/// containing the group's first index.
pub fn subspace_angle(
    sys: &LaplacianSystem,
    eig: &EigResult,
    group: &[usize],
    reference: &ReferenceSpectrum,
) -> Result<f64> {
    let first = *group.first().ok_or_else(|| invalid("empty eigenvalue group"))?;
    if group.iter().any(|&g| g >= eig.len()) {
        return Err(invalid("group index beyond the computed eigenpairs"));
    }
    if first >= reference.len() {
        return Err(invalid("group index beyond the reference spectrum"));
    }
    let ref_group = group_by_gap(reference.eigenvalues())
        .into_iter()
        .find(|g| g.contains(&first))
        .unwrap_or_default();
    if ref_group.len() != group.len() {
        return Err(Error::MultiplicityMismatch {
            discrete: group.len(),
            reference: ref_group.len(),
        });
    }
    let pts = sys.cloud().points();
    let discrete: Vec<Vec<f64>> = group.iter().map(|&g| eig.eigenvectors[g].clone()).collect();
    let analytic: Vec<Vec<f64>> = ref_group
        .iter()
        .map(|&k| pts.iter().map(|x| reference.eval(k, x)).collect())
        .collect();
    principal_angle(sys, &discrete, &analytic)
}
