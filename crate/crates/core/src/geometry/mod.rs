//! Model manifolds, densities, sampling and reference spectra.
//!
//! Three manifolds are supported: an interval in `R^1` (with boundary), a
//! circle in `R^2` and a sphere in `R^3`. Points are always stored as
//! `[f64; 3]` with unused trailing coordinates equal to zero, so ambient
//! distances are plain Euclidean distances of the padded arrays.

mod density;
mod fd;
mod quadrature;
mod reference;
mod sample;

pub use density::{DensityForm, DensitySpec};
pub use fd::fd_oracle_1d;
pub use quadrature::{quadrature_grid, QuadratureGrid};
pub use reference::{reference_spectrum, Provenance, ReferenceSpectrum, MAX_REFERENCE_COUNT};
pub use sample::{sample, INVERSE_CDF_INTERVALS};

use std::f64::consts::PI;

use serde::Serialize;

use crate::{invalid, Result};

pub type Point = [f64; 3];

/// Distance tolerance for "lies on the manifold".
pub const EMBEDDING_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ManifoldModel {
    Interval { a: f64, b: f64 },
    Circle { radius: f64 },
    Sphere { radius: f64 },
}

impl ManifoldModel {
    pub fn unit_interval() -> Self {
        Self::Interval { a: 0.0, b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Interval { a, b } if !(a.is_finite() && b.is_finite() && a < b) => {
                Err(invalid(format!("interval needs a < b, got [{a}, {b}]")))
            }
            Self::Circle { radius } | Self::Sphere { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(invalid(format!("radius must be positive, got {radius}")))
            }
            _ => Ok(()),
        }
    }

    /// Manifold dimension `k`.
    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Self::Interval { .. } | Self::Circle { .. } => 1,
            Self::Sphere { .. } => 2,
        }
    }

    /// Embedding dimension `d`.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            Self::Circle { .. } => 2,
            Self::Sphere { .. } => 3,
        }
    }

    pub fn has_boundary(&self) -> bool {
        matches!(self, Self::Interval { .. })
    }

    /// Length, circumference or area.
    pub fn volume(&self) -> f64 {
        match *self {
            Self::Interval { a, b } => b - a,
            Self::Circle { radius } => 2.0 * PI * radius,
            Self::Sphere { radius } => 4.0 * PI * radius * radius,
        }
    }

    /// Normalized intrinsic coordinate in `[0, 1]`: arc-length fraction for
    /// the 1D shapes, polar angle over `pi` on the sphere.
    pub fn coordinate(&self, x: &Point) -> f64 {
        match *self {
            Self::Interval { a, b } => ((x[0] - a) / (b - a)).clamp(0.0, 1.0),
            Self::Circle { .. } => {
                let theta = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
                theta / (2.0 * PI)
            }
            Self::Sphere { radius } => (x[2] / radius).clamp(-1.0, 1.0).acos() / PI,
        }
    }

    /// Point with intrinsic coordinate `s` on a one-dimensional shape.
    pub fn point_at(&self, s: f64) -> Option<Point> {
        match *self {
            Self::Interval { a, b } => Some([a + (b - a) * s, 0.0, 0.0]),
            Self::Circle { radius } => {
                let theta = 2.0 * PI * s;
                Some([radius * theta.cos(), radius * theta.sin(), 0.0])
            }
            Self::Sphere { .. } => None,
        }
    }

    /// Distance from `x` to the manifold (zero for contained points).
    pub fn embedding_error(&self, x: &Point) -> f64 {
        let pad: f64 = x[self.ambient_dim()..].iter().map(|v| v.abs()).sum();
        let on = match *self {
            Self::Interval { a, b } => (a - x[0]).max(x[0] - b).max(0.0),
            Self::Circle { radius } => ((x[0] * x[0] + x[1] * x[1]).sqrt() - radius).abs(),
            Self::Sphere { radius } => (norm(x) - radius).abs(),
        };
        on + pad
    }
}

pub(crate) fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

#[inline]
pub fn squared_distance(x: &Point, y: &Point) -> f64 {
    let d0 = x[0] - y[0];
    let d1 = x[1] - y[1];
    let d2 = x[2] - y[2];
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Sample points on a manifold together with the density at each point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Vec<Point>,
    density_at_points: Vec<f64>,
    manifold: ManifoldModel,
    seed: u64,
}

impl PointCloud {
    /// Wraps externally produced points after checking they lie on `manifold`.
    pub fn from_points(manifold: ManifoldModel, points: Vec<Point>, density: &DensitySpec, seed: u64) -> Result<Self> {
        manifold.validate()?;
        if points.is_empty() {
            return Err(invalid("a point cloud needs at least one point"));
        }
        if let Some((i, x)) = points
            .iter()
            .enumerate()
            .find(|(_, x)| manifold.embedding_error(x) > EMBEDDING_TOLERANCE * (1.0 + norm(x)))
        {
            return Err(invalid(format!("point {i} = {x:?} is not on {manifold:?}")));
        }
        let density_at_points = points.iter().map(|x| density.eval(x)).collect();
        Ok(Self {
            points,
            density_at_points,
            manifold,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn density_at_points(&self) -> &[f64] {
        &self.density_at_points
    }

    pub fn manifold(&self) -> &ManifoldModel {
        &self.manifold
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Reorders the cloud: point `i` of the result is point `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            points: order.iter().map(|&i| self.points[i]).collect(),
            density_at_points: order.iter().map(|&i| self.density_at_points[i]).collect(),
            manifold: self.manifold,
            seed: self.seed,
        }
    }
}
