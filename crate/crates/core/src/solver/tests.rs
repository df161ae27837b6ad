use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;

use super::*;
use crate::assembly::{assemble, normalization_constant};
use crate::geometry::{sample, DensitySpec, ManifoldModel, PointCloud};
use crate::kernel::KernelSpec;

fn interval_system(n: usize, t: f64, seed: u64) -> LaplacianSystem {
    let m = ManifoldModel::unit_interval();
    let d = DensitySpec::uniform(&m).unwrap();
    let cloud = sample(&m, &d, n, seed).unwrap();
    assemble(&cloud, &KernelSpec::wendland41(), t).unwrap()
}

fn circle_system(n: usize, t: f64, seed: u64) -> LaplacianSystem {
    let m = ManifoldModel::Circle { radius: 1.0 };
    let d = DensitySpec::uniform(&m).unwrap();
    let cloud = sample(&m, &d, n, seed).unwrap();
    assemble(&cloud, &KernelSpec::wendland41(), t).unwrap()
}

#[test]
fn two_isolated_points_have_double_zero() {
    let m = ManifoldModel::Interval { a: 0.0, b: 10.0 };
    let d = DensitySpec::uniform(&m).unwrap();
    let cloud = PointCloud::from_points(m, vec![[0.0; 3], [10.0, 0.0, 0.0]], &d, 0).unwrap();
    let sys = assemble(&cloud, &KernelSpec::wendland41(), 0.01).unwrap();
    let eig = solve_eig(&sys, 2).unwrap();
    assert_eq!(eig.eigenvalues, vec![0.0, 0.0]);
    assert!(eig.orthonormality_error(&sys) < 1e-12);
}

#[test]
fn count_is_validated() {
    let sys = interval_system(20, 0.05, 1);
    assert!(matches!(solve_eig(&sys, 0), Err(Error::InvalidArgument(_))));
    assert!(matches!(solve_eig(&sys, 21), Err(Error::InvalidArgument(_))));
}

#[test]
fn regular_grid_matches_general_eigensolver() {
    // midpoint grid n = 500, t = 0.01; values from an unsymmetric QZ solve
    // of the same pencil (no definiteness assumed)
    let n = 500;
    let m = ManifoldModel::unit_interval();
    let d = DensitySpec::uniform(&m).unwrap();
    let pts = (0..n).map(|i| [(i as f64 + 0.5) / n as f64, 0.0, 0.0]).collect();
    let cloud = PointCloud::from_points(m, pts, &d, 0).unwrap();
    let sys = assemble(&cloud, &KernelSpec::wendland41(), 0.01).unwrap();
    let eig = solve_eig(&sys, 6).unwrap();
    let expect = [11.03370716594, 45.26847153164, 106.3792042268, 201.5461175304, 343.6444500671];
    for (got, want) in eig.eigenvalues[1..].iter().zip(expect) {
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }
}

#[test]
fn interval_eigenpairs_satisfy_contract() {
    let sys = interval_system(2000, 0.01, 42);
    let eig = solve_eig(&sys, 6).unwrap();
    assert_eq!(eig.method, EigMethod::Dense);
    assert!(eig.eigenvalues[0].abs() < 1e-6);
    assert!(eig.orthonormality_error(&sys) < 1e-8);
    let scale = sys.mass_norm_inf();
    for (lam, r) in eig.eigenvalues.iter().zip(&eig.residuals) {
        assert!(*r <= 1e-6 * (1.0 + lam) * scale, "residual {r} at {lam}");
    }
    for w in eig.eigenvalues.windows(2) {
        assert!(w[0] <= w[1]);
    }
    // ground state is the constant vector
    let u = &eig.eigenvectors[0];
    let one = vec![1.0; u.len()];
    let b1 = sys.apply_mass(&one);
    let cos = dot(u, &b1) / dot(&one, &b1).sqrt();
    assert!(cos.abs().min(1.0).acos() < 1e-3);
}

#[test]
fn rayleigh_quotients_reproduce_eigenvalues() {
    let sys = circle_system(400, 0.02, 3);
    let eig = solve_eig(&sys, 5).unwrap();
    for (lam, u) in eig.eigenvalues.iter().zip(&eig.eigenvectors).skip(1) {
        assert!((rayleigh_quotient(&sys, u) - lam).abs() <= 1e-8 * lam);
    }
}

#[test]
fn lanczos_paths_agree_with_dense() {
    let sys = interval_system(400, 0.005, 8);
    let defl = Deflation::new(&sys).unwrap();
    let (dense_modes, _) = dense_nonzero_modes(&sys, &defl, 5).unwrap();
    let dense_vals = rayleigh_ritz(&sys, &dense_modes).unwrap().0;
    for factor in [true, false] {
        let (modes, _) = lanczos_modes_with(&sys, &defl, 5, factor).unwrap();
        let vals = rayleigh_ritz(&sys, &modes).unwrap().0;
        for (a, b) in vals.iter().zip(&dense_vals) {
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b} (factor = {factor})");
        }
    }
}

#[test]
fn iterative_path_used_above_dense_limit() {
    let sys = circle_system(2100, 0.01, 5);
    let eig = solve_eig(&sys, 3).unwrap();
    assert_eq!(eig.method, EigMethod::Lanczos);
    assert!(eig.orthonormality_error(&sys) < 1e-8);
    assert!((eig.eigenvalues[1] - 1.0).abs() < 0.3);
}

#[test]
fn gap_grouping() {
    assert_eq!(group_by_gap(&[0.0, 1.0, 1.0005, 4.0]), vec![vec![0], vec![1, 2], vec![3]]);
    assert_eq!(group_by_gap(&[]), Vec::<Vec<usize>>::new());
    assert_eq!(group_by_gap(&[2.0, 2.1]), vec![vec![0], vec![1]]);
}

#[test]
fn zero_forcing_gives_zero_solution() {
    let sys = interval_system(200, 0.01, 2);
    let sol = solve_poisson(&sys, &vec![0.0; 200]).unwrap();
    assert!(sol.u.iter().all(|&x| x == 0.0));
    assert_eq!(sol.iterations, 0);
}

#[test]
fn poisson_matches_lagrange_multiplier_oracle() {
    let n = 300;
    let sys = interval_system(n, 0.01, 11);
    let f: Vec<f64> = sys.cloud().points().iter().map(|p| (3.0 * p[0]).exp() - p[0]).collect();
    let sol = solve_poisson(&sys, &f).unwrap();
    assert!(sol.rhs_projection_applied);
    assert!(sol.residual < 1e-8);

    // [ L/n  1 ] [u]   [ B f / n ]
    // [ 1^T  0 ] [m] = [    0    ]
    let l = sys.stiffness_dense();
    let b = sys.mass_dense();
    let nf = n as f64;
    let a = Mat::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => l[(i, j)] / nf,
        (true, false) | (false, true) => 1.0,
        (false, false) => 0.0,
    });
    let rhs = Mat::from_fn(n + 1, 1, |i, _| {
        if i < n {
            (0..n).map(|j| b[(i, j)] * f[j]).sum::<f64>() / nf
        } else {
            0.0
        }
    });
    let x = a.partial_piv_lu().solve(&rhs);
    let umax = sol.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        assert!((x[(i, 0)] - sol.u[i]).abs() <= 1e-8 * umax, "row {i}");
    }
    let sum: f64 = sol.u.iter().sum();
    assert!(sum.abs() <= 1e-10 * nf * umax);
}

#[test]
fn poisson_rejects_wrong_length() {
    let sys = interval_system(50, 0.01, 2);
    assert!(solve_poisson(&sys, &[1.0; 49]).is_err());
    assert!(solve_poisson(&sys, &[f64::NAN; 50]).is_err());
}

#[test]
fn poisson_stability_under_refinement() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let t = 0.01;
    let mut worst = Vec::new();
    for n in [500, 1000, 2000] {
        let sys = interval_system(n, t, 100 + n as u64);
        let mut ratio = 0.0f64;
        for _ in 0..20 {
            let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let sol = solve_poisson(&sys, &f).unwrap();
            let rms = (sol.u.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
            let fmax = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            ratio = ratio.max(rms / fmax);
        }
        worst.push(ratio);
    }
    assert!(worst.iter().all(|&r| r <= 2.0 * worst[0]), "{worst:?}");
}

#[test]
fn ttn_of_zero_is_zero() {
    let sys = interval_system(80, 0.01, 4);
    let ev = TtnEvaluator::new(&sys, &vec![0.0; 80]).unwrap();
    for x in [0.0, 0.33, 1.0] {
        assert_eq!(ev.eval(&[x, 0.0, 0.0]).unwrap(), 0.0);
    }
}

#[test]
fn ttn_midpoint_matches_direct_formula() {
    let n = 50;
    let t = 0.01;
    let sys = interval_system(n, t, 6);
    let pts = sys.cloud().points().to_vec();
    let f: Vec<f64> = pts.iter().map(|p| (PI * p[0]).cos()).collect();
    let sol = solve_poisson(&sys, &f).unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]));
    let q = [(pts[order[20]][0] + pts[order[21]][0]) / 2.0, 0.0, 0.0];

    let c_t = normalization_constant(t, 1);
    let k = KernelSpec::wendland41();
    let mut w = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for j in 0..n {
        let r = (q[0] - pts[j][0]).powi(2) / (4.0 * t);
        let rt = if r <= 1.0 { c_t * (1.0 - r).powi(4) * (4.0 * r + 1.0) } else { 0.0 };
        let bt = if r <= 1.0 { c_t * (1.0 - r).powi(5) * (2.0 * r + 1.0) / 3.0 } else { 0.0 };
        w += rt / n as f64;
        first += rt * sol.u[j];
        second += bt * f[j];
    }
    let _ = k;
    let direct = first / (n as f64 * w) + t * second / (n as f64 * w);
    let got = apply_ttn(&sys, &f, &q).unwrap();
    assert!((got - direct).abs() <= 1e-12 * (1.0 + direct.abs()), "{got} vs {direct}");
    assert!(matches!(apply_ttn(&sys, &f, &[5.0, 0.0, 0.0]), Err(Error::OutOfSupport)));
}

#[test]
fn ttn_satisfies_discrete_equation_at_samples() {
    let n = 400;
    let t = 0.01;
    let sys = interval_system(n, t, 9);
    let pts = sys.cloud().points().to_vec();
    let raw: Vec<f64> = pts.iter().map(|p| p[0] * p[0]).collect();
    // shift f so that the smoothed right-hand side has zero sum
    let bf = sys.apply_mass(&raw);
    let b1 = sys.apply_mass(&vec![1.0; n]);
    let c = bf.iter().sum::<f64>() / b1.iter().sum::<f64>();
    let f: Vec<f64> = raw.iter().map(|v| v - c).collect();
    let ev = TtnEvaluator::new(&sys, &f).unwrap();
    let tf: Vec<f64> = pts.iter().map(|p| ev.eval(p).unwrap()).collect();
    let bf = sys.apply_mass(&f);
    let k = sys.kernel();
    let nf = n as f64;
    for i in (0..n).step_by(13) {
        let lhs: f64 = (0..n)
            .map(|j| {
                let r = crate::geometry::squared_distance(&pts[i], &pts[j]) / (4.0 * t);
                if r <= 1.0 {
                    k.eval_r(r) * (tf[i] - tf[j])
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / (nf * t);
        let rhs = bf[i] / nf;
        assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()), "row {i}: {lhs} vs {rhs}");
    }
}

#[test]
fn extension_restricts_to_eigenvector() {
    let sys = circle_system(600, 0.02, 12);
    let eig = solve_eig(&sys, 4).unwrap();
    for (lam, u) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        for (j, p) in sys.cloud().points().iter().enumerate() {
            let v = extend_eigvec(&sys, u, *lam, p).unwrap();
            assert!((v - u[j]).abs() <= 1e-10, "{v} vs {}", u[j]);
        }
    }
}

#[test]
fn extension_of_constant_is_constant() {
    let sys = interval_system(100, 0.01, 3);
    let u = vec![2.5; 100];
    for x in [0.0, 0.5, 0.77, 1.0] {
        assert!((extend_eigvec(&sys, &u, 0.0, &[x, 0.0, 0.0]).unwrap() - 2.5).abs() < 1e-14);
    }
    assert!(matches!(extend_eigvec(&sys, &u, 0.0, &[3.0, 0.0, 0.0]), Err(Error::OutOfSupport)));
}

#[test]
fn circle_extension_fits_first_harmonic() {
    let sys = circle_system(1000, 0.01, 21);
    let eig = solve_eig(&sys, 2).unwrap();
    let u = &eig.eigenvectors[1];
    let lam = eig.eigenvalues[1];
    let grid: Vec<f64> = (0..200).map(|k| 2.0 * PI * k as f64 / 200.0).collect();
    let vals: Vec<f64> = grid
        .iter()
        .map(|&th| extend_eigvec(&sys, u, lam, &[th.cos(), th.sin(), 0.0]).unwrap())
        .collect();
    // least squares a cos + b sin via the 2x2 normal equations
    let (mut cc, mut cs, mut ss, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&th, &y) in grid.iter().zip(&vals) {
        let (c, s) = (th.cos(), th.sin());
        cc += c * c;
        cs += c * s;
        ss += s * s;
        yc += y * c;
        ys += y * s;
    }
    let det = cc * ss - cs * cs;
    let a = (yc * ss - ys * cs) / det;
    let b = (ys * cc - yc * cs) / det;
    let dev = grid
        .iter()
        .zip(&vals)
        .map(|(&th, &y)| (y - a * th.cos() - b * th.sin()).abs())
        .fold(0.0, f64::max);
    assert!(dev < 0.1, "max deviation {dev}");
}

#[test]
fn spectrum_invariant_under_kernel_scaling_and_permutation() {
    let m = ManifoldModel::unit_interval();
    let d = DensitySpec::uniform(&m).unwrap();
    let cloud = sample(&m, &d, 300, 31).unwrap();
    let base = solve_eig(&assemble(&cloud, &KernelSpec::wendland41(), 0.01).unwrap(), 6).unwrap();
    let scaled = solve_eig(&assemble(&cloud, &KernelSpec::wendland41().scaled(3.7), 0.01).unwrap(), 6).unwrap();
    let order: Vec<usize> = (0..300).rev().collect();
    let permuted = solve_eig(&assemble(&cloud.permuted(&order), &KernelSpec::wendland41(), 0.01).unwrap(), 6).unwrap();
    for k in 1..6 {
        let l = base.eigenvalues[k];
        assert!((scaled.eigenvalues[k] - l).abs() <= 1e-10 * l);
        assert!((permuted.eigenvalues[k] - l).abs() <= 1e-10 * l);
    }
}
