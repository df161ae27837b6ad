use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DensitySpec, ManifoldModel, Point, PointCloud};
use crate::{invalid, Error, Result};

/// Intervals of the tabulated inverse CDF used for 1D sampling.
pub const INVERSE_CDF_INTERVALS: usize = 10_000;

const MIN_ACCEPTANCE: f64 = 1e-3;

/// Draws `n` independent samples from `density` on `manifold`.
///
/// The interval and circle use inverse-CDF sampling on a tabulated CDF with
/// linear interpolation; the sphere draws uniform directions and thins them
/// by rejection against the maximum of the density. Output is a pure
/// function of the arguments.
pub fn sample(manifold: &ManifoldModel, density: &DensitySpec, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    manifold.validate()?;
    if density.manifold() != manifold {
        return Err(invalid("density was built for a different manifold"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = match *manifold {
        ManifoldModel::Interval { .. } | ManifoldModel::Circle { .. } => {
            let cdf = density.coordinate_cdf(INVERSE_CDF_INTERVALS);
            (0..n)
                .map(|_| {
                    let s = invert_cdf(&cdf, rng.random::<f64>());
                    manifold.point_at(s).expect("one-dimensional shape")
                })
                .collect()
        }
        ManifoldModel::Sphere { radius } => sample_sphere(density, radius, n, &mut rng)?,
    };
    let density_at_points = points.iter().map(|x| density.eval(x)).collect();
    Ok(PointCloud {
        points,
        density_at_points,
        manifold: *manifold,
        seed,
    })
}

fn invert_cdf(cdf: &[f64], u: f64) -> f64 {
    let m = cdf.len() - 1;
    // first node with cdf > u
    let hi = cdf.partition_point(|&c| c <= u).clamp(1, m);
    let lo = hi - 1;
    let span = cdf[hi] - cdf[lo];
    let frac = if span > 0.0 { (u - cdf[lo]) / span } else { 0.0 };
    ((lo as f64 + frac) / m as f64).clamp(0.0, 1.0)
}

fn sample_sphere(density: &DensitySpec, radius: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    let uniform = density.is_uniform();
    let (_, q_max) = density.profile_range();
    let manifold = ManifoldModel::Sphere { radius };
    let mut out = Vec::with_capacity(n);
    let mut proposed: u64 = 0;
    while out.len() < n {
        let x = unit_direction(rng);
        proposed += 1;
        let p = [radius * x[0], radius * x[1], radius * x[2]];
        if uniform || rng.random::<f64>() * q_max <= density.profile(manifold.coordinate(&p)) {
            out.push(p);
        }
        if proposed >= 10_000 {
            let rate = out.len() as f64 / proposed as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::DegenerateDensity { rate });
            }
        }
    }
    Ok(out)
}

fn unit_direction(rng: &mut ChaCha8Rng) -> Point {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 1e-12 {
            return [v[0] / r, v[1] / r, v[2] / r];
        }
    }
}
