use std::f64::consts::PI;

use super::{fd_oracle_1d, DensitySpec, ManifoldModel, Point};
use crate::{invalid, Error, Result};

/// Largest number of reference eigenvalues served.
pub const MAX_REFERENCE_COUNT: usize = 64;
/// Grid used when a nonuniform 1D density needs the finite-difference oracle.
pub const DEFAULT_FD_NODES: usize = 4001;
const DEFAULT_FD_NODES_PERIODIC: usize = 1200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    FdOracle { m: usize },
}

#[derive(Clone, Debug)]
pub(crate) enum Basis {
    IntervalCosines { a: f64, b: f64 },
    CircleHarmonics,
    SphereHarmonics,
    /// Eigenvectors on a uniform grid of the intrinsic coordinate.
    Tabulated {
        manifold: ManifoldModel,
        nodes: usize,
        periodic: bool,
        vectors: Vec<Vec<f64>>,
    },
}

/// Eigenvalues of `-(1/p^2) div(p^2 grad u) = lambda u` with Neumann data,
/// ascending and repeated by multiplicity, plus pointwise eigenfunctions.
#[derive(Clone, Debug)]
pub struct ReferenceSpectrum {
    eigenvalues: Vec<f64>,
    basis: Basis,
    provenance: Provenance,
}

impl ReferenceSpectrum {
    pub(crate) fn new(eigenvalues: Vec<f64>, basis: Basis, provenance: Provenance) -> Self {
        Self {
            eigenvalues,
            basis,
            provenance,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenfunction `index` at `x` (unnormalized).
    pub fn eval(&self, index: usize, x: &Point) -> f64 {
        match &self.basis {
            Basis::IntervalCosines { a, b } => {
                let s = (x[0] - a) / (b - a);
                (index as f64 * PI * s).cos()
            }
            Basis::CircleHarmonics => {
                let theta = x[1].atan2(x[0]);
                let k = index.div_ceil(2) as f64;
                if index == 0 {
                    1.0
                } else if index % 2 == 1 {
                    (k * theta).cos()
                } else {
                    (k * theta).sin()
                }
            }
            Basis::SphereHarmonics => {
                let r = super::norm(x);
                let z = x[2] / r;
                let phi = x[1].atan2(x[0]);
                let (l, m, sine) = sphere_index(index);
                let p = associated_legendre(l, m, z);
                if m == 0 {
                    p
                } else if sine {
                    p * (m as f64 * phi).sin()
                } else {
                    p * (m as f64 * phi).cos()
                }
            }
            Basis::Tabulated {
                manifold,
                nodes,
                periodic,
                vectors,
            } => {
                let v = &vectors[index];
                let s = manifold.coordinate(x);
                let cells = if *periodic { *nodes } else { nodes - 1 };
                let pos = s * cells as f64;
                let k = (pos.floor() as usize).min(cells - 1);
                let frac = pos - k as f64;
                let next = if *periodic { (k + 1) % nodes } else { k + 1 };
                v[k] * (1.0 - frac) + v[next] * frac
            }
        }
    }
}

/// `(l, m, is_sine)` of the real spherical harmonic at position `index`.
fn sphere_index(index: usize) -> (usize, usize, bool) {
    let mut l = 0;
    while (l + 1) * (l + 1) <= index {
        l += 1;
    }
    let offset = index - l * l;
    if offset == 0 {
        (l, 0, false)
    } else {
        (l, offset.div_ceil(2), offset % 2 == 0)
    }
}

fn associated_legendre(l: usize, m: usize, z: f64) -> f64 {
    let sin = (1.0 - z * z).max(0.0).sqrt();
    let mut pmm = 1.0;
    for i in 0..m {
        pmm *= (2 * i + 1) as f64 * sin;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = z * (2 * m + 1) as f64 * pmm;
    for ll in m + 2..=l {
        let next = ((2 * ll - 1) as f64 * z * cur - (ll + m - 1) as f64 * prev) / (ll - m) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

/// Reference spectrum for a manifold and density.
///
/// Uniform densities use closed forms; nonuniform densities on the interval
/// and circle use the finite-difference oracle.
pub fn reference_spectrum(manifold: &ManifoldModel, density: &DensitySpec, count: usize) -> Result<ReferenceSpectrum> {
    if count == 0 || count > MAX_REFERENCE_COUNT {
        return Err(invalid(format!(
            "reference count must be in 1..={MAX_REFERENCE_COUNT}, got {count}"
        )));
    }
    manifold.validate()?;
    if !density.is_uniform() {
        return match manifold {
            ManifoldModel::Interval { .. } => fd_oracle_1d(density, DEFAULT_FD_NODES, manifold, count),
            ManifoldModel::Circle { .. } => fd_oracle_1d(density, DEFAULT_FD_NODES_PERIODIC, manifold, count),
            ManifoldModel::Sphere { .. } => Err(Error::UnsupportedConfiguration(
                "nonuniform densities on the sphere have no reference spectrum".into(),
            )),
        };
    }
    let (eigenvalues, basis) = match *manifold {
        ManifoldModel::Interval { a, b } => {
            let len = b - a;
            let ev = (0..count).map(|m| (m as f64 * PI / len).powi(2)).collect();
            (ev, Basis::IntervalCosines { a, b })
        }
        ManifoldModel::Circle { radius } => {
            let ev = (0..count)
                .map(|i| (i.div_ceil(2) as f64 / radius).powi(2))
                .collect();
            (ev, Basis::CircleHarmonics)
        }
        ManifoldModel::Sphere { radius } => {
            let ev = (0..count)
                .map(|i| {
                    let (l, _, _) = sphere_index(i);
                    (l * (l + 1)) as f64 / (radius * radius)
                })
                .collect();
            (ev, Basis::SphereHarmonics)
        }
    };
    Ok(ReferenceSpectrum::new(eigenvalues, basis, Provenance::ClosedForm))
}
