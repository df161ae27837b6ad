//! Linear algebra building blocks: symmetric sparse storage, tridiagonal
//! eigensolvers, Lanczos iteration and small dense helpers over `faer`.

pub mod csr;
pub mod dense;
pub mod lanczos;
pub mod tridiag;

pub use csr::CsrMatrix;
pub use lanczos::{lanczos_largest, LanczosOptions, RitzPairs, SymmetricOperator};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
