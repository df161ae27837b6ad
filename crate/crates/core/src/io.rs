//! CSV export of clouds, matrices, eigenpairs and Poisson solutions.
//!
//! Floats are written in Rust's shortest round-trip form, so identical
//! inputs give byte-identical files.

use std::io::Write;

use crate::geometry::PointCloud;
use crate::solver::EigResult;
use crate::{invalid, Error, Result};

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv output failed: {e}"))
}

fn coordinate_header(d: usize) -> Vec<String> {
    (1..=d).map(|k| format!("x{k}")).collect()
}

/// Columns `x1..xd, p`.
pub fn write_point_cloud<W: Write>(w: W, cloud: &PointCloud) -> Result<()> {
    let d = cloud.manifold().ambient_dim();
    let mut out = csv::Writer::from_writer(w);
    let mut header = coordinate_header(d);
    header.push("p".into());
    out.write_record(&header).map_err(csv_error)?;
    for (x, p) in cloud.points().iter().zip(cloud.density_at_points()) {
        let mut row: Vec<String> = x[..d].iter().map(|v| v.to_string()).collect();
        row.push(p.to_string());
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush().map_err(|e| invalid(e.to_string()))
}

/// Columns `index, lambda, residual`.
pub fn write_eigenpairs<W: Write>(w: W, eig: &EigResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "lambda", "residual"]).map_err(csv_error)?;
    for (k, (l, r)) in eig.eigenvalues.iter().zip(&eig.residuals).enumerate() {
        out.write_record([k.to_string(), l.to_string(), r.to_string()]).map_err(csv_error)?;
    }
    out.flush().map_err(|e| invalid(e.to_string()))
}

/// One row per point, one column `u<k>` per eigenvector.
pub fn write_eigenvectors<W: Write>(w: W, eig: &EigResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = (0..eig.len()).map(|k| format!("u{k}")).collect();
    out.write_record(&header).map_err(csv_error)?;
    let n = eig.eigenvectors.first().map_or(0, |u| u.len());
    for i in 0..n {
        out.write_record(eig.eigenvectors.iter().map(|u| u[i].to_string()))
            .map_err(csv_error)?;
    }
    out.flush().map_err(|e| invalid(e.to_string()))
}

/// Columns `i, x1..xd, f, u`.
pub fn write_poisson<W: Write>(w: W, cloud: &PointCloud, f: &[f64], u: &[f64]) -> Result<()> {
    let d = cloud.manifold().ambient_dim();
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["i".to_string()];
    header.extend(coordinate_header(d));
    header.push("f".into());
    header.push("u".into());
    out.write_record(&header).map_err(csv_error)?;
    for (i, x) in cloud.points().iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(x[..d].iter().map(|v| v.to_string()));
        row.push(f[i].to_string());
        row.push(u[i].to_string());
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush().map_err(|e| invalid(e.to_string()))
}

/// Columns `i, j, value`.
pub fn write_triplets<W: Write>(w: W, triplets: &[(usize, usize, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "j", "value"]).map_err(csv_error)?;
    for (i, j, v) in triplets {
        out.write_record([i.to_string(), j.to_string(), v.to_string()]).map_err(csv_error)?;
    }
    out.flush().map_err(|e| invalid(e.to_string()))
}
