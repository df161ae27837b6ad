//! Kernel graph Laplacian spectra and point integral solvers on randomly
//! sampled point clouds.
//!
//! The pipeline is `sample -> assemble -> solve`:
//!
//! - [`geometry`] draws point clouds from model manifolds with a prescribed
//!   density and supplies reference spectra of the weighted Neumann
//!   Laplacian `-(1/p^2) div(p^2 grad u)`.
//! - [`assembly`] builds the stiffness matrix `L` from `R(|x_i - x_j|^2/4t)`
//!   and the mass matrix `B` from its tail integral `bar-R`.
//! - [`solver`] solves the pencil `L u = lambda B u`, the point integral
//!   Poisson system, and evaluates the continuous extensions of both.
//! - [`analysis`] measures errors against the reference spectra and fits
//!   convergence rates.

pub mod analysis;
pub mod assembly;
pub mod geometry;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod numeric;
pub mod solver;

pub use assembly::{assemble, assemble_with, AssemblyOptions, LaplacianSystem, Storage};
pub use geometry::{DensitySpec, ManifoldModel, PointCloud, ReferenceSpectrum};
pub use kernel::{validate_kernel, KernelSpec, ValidationReport};
pub use solver::{solve_eig, solve_poisson, EigResult, PoissonSolution};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
    #[error("degenerate density: rejection acceptance rate {rate:.3e} below 1e-3")]
    DegenerateDensity { rate: f64 },
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        residual_history: Vec<f64>,
    },
    #[error("query point lies outside every kernel support")]
    OutOfSupport,
    #[error("multiplicity mismatch: discrete group has {discrete} vectors, reference has {reference}")]
    MultiplicityMismatch { discrete: usize, reference: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
