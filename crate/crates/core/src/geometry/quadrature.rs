use std::f64::consts::PI;

use super::{ManifoldModel, Point};
use crate::{invalid, Result};

/// Nodes on a manifold with positive weights summing to its volume.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Trapezoid rule on the interval, equispaced angles on the circle and a
/// Fibonacci lattice with equal weights on the sphere.
pub fn quadrature_grid(manifold: &ManifoldModel, m: usize) -> Result<QuadratureGrid> {
    if m < 2 {
        return Err(invalid(format!("quadrature needs at least 2 nodes, got {m}")));
    }
    manifold.validate()?;
    let grid = match *manifold {
        ManifoldModel::Interval { a, b } => {
            let h = (b - a) / (m - 1) as f64;
            let nodes = (0..m).map(|i| [a + h * i as f64, 0.0, 0.0]).collect();
            let weights = (0..m)
                .map(|i| if i == 0 || i == m - 1 { 0.5 * h } else { h })
                .collect();
            QuadratureGrid { nodes, weights }
        }
        ManifoldModel::Circle { radius } => {
            let nodes = (0..m)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / m as f64;
                    [radius * th.cos(), radius * th.sin(), 0.0]
                })
                .collect();
            QuadratureGrid {
                nodes,
                weights: vec![2.0 * PI * radius / m as f64; m],
            }
        }
        ManifoldModel::Sphere { radius } => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let nodes = (0..m)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    [radius * rho * phi.cos(), radius * rho * phi.sin(), radius * z]
                })
                .collect();
            QuadratureGrid {
                nodes,
                weights: vec![4.0 * PI * radius * radius / m as f64; m],
            }
        }
    };
    Ok(grid)
}
