use rayon::prelude::*;

use crate::geometry::{quadrature_grid, squared_distance, DensitySpec, Point, PointCloud};
use crate::kernel::KernelSpec;
use crate::{invalid, Result};

/// Number of kernel centers over which the supremum is taken.
pub const DEFAULT_CENTERS: usize = 256;
/// Quadrature nodes for the population integral.
pub const DEFAULT_QUADRATURE_NODES: usize = 4001;

/// `max_x |int R(|x-y|^2/4t) p(y) dy - (1/n) sum_j R(|x-x_j|^2/4t)|` over a
/// grid of `centers` points `x`, with the unnormalized kernel.
pub fn discrepancy(cloud: &PointCloud, kernel: &KernelSpec, t: f64, density: &DensitySpec, centers: usize) -> Result<f64> {
    if centers < 8 {
        return Err(invalid(format!("at least 8 centers required, got {centers}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("bandwidth t must be positive, got {t}")));
    }
    let manifold = cloud.manifold();
    if density.manifold() != manifold {
        return Err(invalid("density and cloud live on different manifolds"));
    }
    let grid = quadrature_grid(manifold, centers)?;
    let quad = quadrature_grid(manifold, DEFAULT_QUADRATURE_NODES)?;
    let masses: Vec<f64> = quad.nodes.iter().zip(&quad.weights).map(|(y, w)| w * density.eval(y)).collect();
    Ok(discrepancy_against(cloud, |r| kernel.eval_r(r), t, &grid.nodes, &quad.nodes, &masses))
}

/// Discrepancy against an explicit discrete measure `sum_k masses_k delta_{nodes_k}`.
pub fn discrepancy_against(
    cloud: &PointCloud,
    profile: impl Fn(f64) -> f64 + Sync,
    t: f64,
    centers: &[Point],
    nodes: &[Point],
    masses: &[f64],
) -> f64 {
    let inv_n = 1.0 / cloud.len() as f64;
    let scale = 1.0 / (4.0 * t);
    centers
        .par_iter()
        .map(|x| {
            let population: f64 = nodes
                .iter()
                .zip(masses)
                .map(|(y, m)| m * profile(squared_distance(x, y) * scale))
                .sum();
            let empirical: f64 = cloud.points().iter().map(|y| profile(squared_distance(x, y) * scale)).sum::<f64>() * inv_n;
            (population - empirical).abs()
        })
        .reduce(|| 0.0, f64::max)
}
