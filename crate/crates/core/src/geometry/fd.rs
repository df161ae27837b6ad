use faer::Mat;

use super::reference::{Basis, Provenance, ReferenceSpectrum};
use super::{DensitySpec, ManifoldModel};
use crate::linalg::dense;
use crate::linalg::tridiag::SymTridiagonal;
use crate::{invalid, Result};

/// Finite-difference spectrum of `-(1/p^2) (p^2 u')'` on an interval with
/// Neumann ends or on a circle with periodic wrap.
///
/// The flux `p^2` is sampled at cell midpoints and the Neumann condition is
/// closed with a mirrored ghost node, which makes the operator symmetric in
/// the weighted inner product `sum_i w_i p_i^2 u_i v_i` (end weights halved).
/// The similarity transform by the square root of those weights yields a
/// symmetric matrix: tridiagonal on the interval (solved by bisection),
/// cyclic on the circle (solved densely).
pub fn fd_oracle_1d(density: &DensitySpec, m: usize, domain: &ManifoldModel, count: usize) -> Result<ReferenceSpectrum> {
    if m < 3 {
        return Err(invalid(format!("finite-difference grid needs m >= 3, got {m}")));
    }
    if count > m {
        return Err(invalid(format!("requested {count} eigenvalues from a grid of {m} nodes")));
    }
    if density.manifold() != domain {
        return Err(invalid("density was built for a different manifold"));
    }
    match *domain {
        ManifoldModel::Interval { a, b } => interval(density, m, a, b, count),
        ManifoldModel::Circle { radius } => circle(density, m, radius, count),
        ManifoldModel::Sphere { .. } => Err(crate::Error::UnsupportedConfiguration(
            "finite-difference oracle covers one-dimensional domains only".into(),
        )),
    }
}

fn interval(density: &DensitySpec, m: usize, a: f64, b: f64, count: usize) -> Result<ReferenceSpectrum> {
    let h = (b - a) / (m - 1) as f64;
    let node_s = |i: usize| i as f64 / (m - 1) as f64;
    let p2 = |s: f64| density.profile(s).powi(2);
    // flux between node i and i+1
    let flux: Vec<f64> = (0..m - 1).map(|i| p2((i as f64 + 0.5) / (m - 1) as f64) / (h * h)).collect();
    let weight: Vec<f64> = (0..m)
        .map(|i| {
            let w = p2(node_s(i));
            if i == 0 || i == m - 1 {
                0.5 * w
            } else {
                w
            }
        })
        .collect();
    // stiffness K (row i: flux_{i-1} (u_i - u_{i-1}) + flux_i (u_i - u_{i+1}))
    let diag: Vec<f64> = (0..m)
        .map(|i| {
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            let right = if i + 1 < m { flux[i] } else { 0.0 };
            (left + right) / weight[i]
        })
        .collect();
    let off: Vec<f64> = (0..m - 1).map(|i| -flux[i] / (weight[i] * weight[i + 1]).sqrt()).collect();
    let t = SymTridiagonal::new(diag, off);
    let mut eigenvalues = t.smallest_eigenvalues(count);
    let mut vectors = Vec::with_capacity(count);
    for (k, lambda) in eigenvalues.iter_mut().enumerate() {
        let y = if k == 0 {
            // exact null vector of the similarity-transformed operator
            let v: Vec<f64> = weight.iter().map(|w| w.sqrt()).collect();
            let nrm = crate::linalg::norm2(&v);
            v.into_iter().map(|x| x / nrm).collect()
        } else {
            t.eigenvector(*lambda)
        };
        if k == 0 {
            *lambda = lambda.max(0.0);
        }
        vectors.push(y.iter().zip(&weight).map(|(y, w)| y / w.sqrt()).collect());
    }
    Ok(ReferenceSpectrum::new(
        eigenvalues,
        Basis::Tabulated {
            manifold: ManifoldModel::Interval { a, b },
            nodes: m,
            periodic: false,
            vectors,
        },
        Provenance::FdOracle { m },
    ))
}

fn circle(density: &DensitySpec, m: usize, radius: f64, count: usize) -> Result<ReferenceSpectrum> {
    let h = 2.0 * std::f64::consts::PI * radius / m as f64;
    let p2 = |s: f64| density.profile(s).powi(2);
    let flux: Vec<f64> = (0..m).map(|i| p2((i as f64 + 0.5) / m as f64) / (h * h)).collect();
    let weight: Vec<f64> = (0..m).map(|i| p2(i as f64 / m as f64)).collect();
    let mut a = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        let j = (i + 1) % m;
        let c = flux[i];
        a[(i, i)] += c / weight[i];
        a[(j, j)] += c / weight[j];
        let o = -c / (weight[i] * weight[j]).sqrt();
        a[(i, j)] += o;
        a[(j, i)] += o;
    }
    let (vals, vecs) = dense::symmetric_eigen(&a)?;
    let mut eigenvalues: Vec<f64> = vals[..count].to_vec();
    if let Some(first) = eigenvalues.first_mut() {
        *first = first.max(0.0);
    }
    let vectors = (0..count)
        .map(|k| (0..m).map(|i| vecs[(i, k)] / weight[i].sqrt()).collect())
        .collect();
    Ok(ReferenceSpectrum::new(
        eigenvalues,
        Basis::Tabulated {
            manifold: ManifoldModel::Circle { radius },
            nodes: m,
            periodic: true,
            vectors,
        },
        Provenance::FdOracle { m },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_interval_first_mode() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::uniform(&m).unwrap();
        let r = fd_oracle_1d(&d, 1001, &m, 4).unwrap();
        assert!((r.eigenvalues()[1] - PI * PI).abs() < 1e-3);
        assert!(r.eigenvalues()[0].abs() < 1e-9);
        // refinement: error shrinks by about 4 per doubling
        let fine = fd_oracle_1d(&d, 2001, &m, 2).unwrap();
        let e1 = (r.eigenvalues()[1] - PI * PI).abs();
        let e2 = (fine.eigenvalues()[1] - PI * PI).abs();
        assert!((e1 / e2 - 4.0).abs() < 0.1, "{}", e1 / e2);
    }

    #[test]
    fn ground_state_is_constant() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::cosine(&m, 0.5).unwrap();
        let r = fd_oracle_1d(&d, 501, &m, 3).unwrap();
        assert!(r.eigenvalues()[0].abs() < 1e-9);
        let v0 = r.eval(0, &[0.1, 0.0, 0.0]);
        let v1 = r.eval(0, &[0.8, 0.0, 0.0]);
        assert!((v0 - v1).abs() < 1e-9 * v0.abs());
    }

    #[test]
    fn cosine_density_refines_consistently() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::cosine(&m, 0.5).unwrap();
        let a = fd_oracle_1d(&d, 2001, &m, 6).unwrap();
        let b = fd_oracle_1d(&d, 4001, &m, 6).unwrap();
        for k in 1..6 {
            let (x, y) = (a.eigenvalues()[k], b.eigenvalues()[k]);
            assert!((x - y).abs() / y < 5e-5, "{k}: {x} vs {y}");
        }
    }

    #[test]
    fn periodic_uniform_matches_harmonics() {
        let c = ManifoldModel::Circle { radius: 1.0 };
        let d = DensitySpec::uniform(&c).unwrap();
        let r = fd_oracle_1d(&d, 400, &c, 5).unwrap();
        let expect = [0.0, 1.0, 1.0, 4.0, 4.0];
        for (v, e) in r.eigenvalues().iter().zip(expect) {
            assert!((v - e).abs() < 1e-3, "{v} vs {e}");
        }
    }

    #[test]
    fn too_many_eigenvalues() {
        let m = ManifoldModel::unit_interval();
        let d = DensitySpec::uniform(&m).unwrap();
        assert!(fd_oracle_1d(&d, 5, &m, 6).is_err());
        assert!(fd_oracle_1d(&d, 2, &m, 1).is_err());
    }
}
