use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::json;

use pim_core::analysis::eig_error_table;
use pim_core::assembly::assemble_with;
use pim_core::geometry::{reference_spectrum, sample, ManifoldModel, Point, PointCloud};
use pim_core::io;
use pim_core::solver::{solve_eig, solve_poisson};
use pim_core::validate_kernel as check_kernel;

use crate::config::{self, Config, Forcing};
use crate::report;
use crate::{CliError, CommonArgs, Format};

/// Residual below which a Poisson run counts as converged.
pub const POISSON_ACCEPT: f64 = 1e-8;

fn prepare(a: &CommonArgs) -> Result<Config, CliError> {
    let mut cfg = config::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.sample.seed = seed;
    }
    if a.jobs == Some(0) {
        return Err(CliError::Config("--jobs must be positive".into()));
    }
    Ok(cfg)
}

fn out_file(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let f = File::create(&path)?;
    Ok((path, BufWriter::new(f)))
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let (_, mut w) = out_file(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Failure(e.to_string()))?;
    use std::io::Write;
    writeln!(w)?;
    Ok(())
}

pub fn validate_kernel(a: &CommonArgs) -> Result<i32, CliError> {
    let cfg = prepare(a)?;
    let kernel = cfg.kernel_spec()?;
    let report = check_kernel(&kernel, cfg.validate.grid_points)
        .map_err(|e| CliError::Config(format!("validate.grid_points: {e}")))?;
    println!("kernel: {}", kernel.name());
    println!("{report}");
    if a.wants(Format::Json) {
        let clauses: Vec<_> = report
            .clauses()
            .iter()
            .map(|(label, c)| json!({"clause": label, "passed": c.passed, "witness": c.witness, "detail": c.detail}))
            .collect();
        write_json(
            &a.out,
            "kernel_report.json",
            &json!({
                "config": cfg,
                "kernel": kernel.name(),
                "clauses": clauses,
                "measured_delta0": report.measured_delta0,
                "measured_c2_jump": report.measured_c2_jump,
                "antiderivative_residual": report.antiderivative_residual,
                "all_passed": report.all_passed(),
            }),
        )?;
    }
    Ok(if report.all_passed() { 0 } else { 1 })
}

struct Prepared {
    cfg: Config,
    cloud: PointCloud,
    t: f64,
}

fn sample_cloud(a: &CommonArgs) -> Result<Prepared, CliError> {
    let cfg = prepare(a)?;
    let manifold = cfg.manifold_model()?;
    let density = cfg.density_spec(&manifold)?;
    cfg.kernel_spec()?;
    let n = cfg.sample_size()?;
    let t = cfg.bandwidth(n, &manifold)?;
    let cloud = sample(&manifold, &density, n, cfg.sample.seed)?;
    Ok(Prepared { cfg, cloud, t })
}

pub fn eig(a: &CommonArgs) -> Result<i32, CliError> {
    let p = sample_cloud(a)?;
    let count = p.cfg.eig.count;
    if count == 0 || count > p.cloud.len() {
        return Err(CliError::Config(format!("eig.count must lie in 1..={}", p.cloud.len())));
    }
    let sys = assemble_with(&p.cloud, &p.cfg.kernel_spec()?, p.t, &p.cfg.assembly_options())?;
    let eig = solve_eig(&sys, count)?;
    println!("n = {}, t = {}, components = {}", sys.len(), p.t, sys.n_components());
    for (k, (l, r)) in eig.eigenvalues.iter().zip(&eig.residuals).enumerate() {
        println!("lambda[{k}] = {l:.10e}  residual {r:.3e}");
    }
    if a.wants(Format::Csv) {
        io::write_point_cloud(out_file(&a.out, "points.csv")?.1, &p.cloud)?;
        io::write_eigenpairs(out_file(&a.out, "eigenpairs.csv")?.1, &eig)?;
        io::write_eigenvectors(out_file(&a.out, "eigenvectors.csv")?.1, &eig)?;
        io::write_triplets(out_file(&a.out, "stiffness.csv")?.1, &sys.stiffness_triplets())?;
        io::write_triplets(out_file(&a.out, "mass.csv")?.1, &sys.mass_triplets())?;
    }
    if a.wants(Format::Json) {
        write_json(
            &a.out,
            "eig_summary.json",
            &json!({
                "config": p.cfg,
                "resolved": {"n": sys.len(), "t": p.t, "seed": p.cfg.sample.seed},
                "eigenvalues": eig.eigenvalues,
                "residuals": eig.residuals,
                "method": eig.method,
                "regularization_applied": eig.regularization_applied,
                "components": sys.n_components(),
                "disconnected": sys.disconnected(),
                "orthonormality_error": eig.orthonormality_error(&sys),
            }),
        )?;
    }
    Ok(0)
}

pub fn sweep(a: &CommonArgs) -> Result<i32, CliError> {
    let cfg = prepare(a)?;
    let grid = cfg.sweep_grid()?;
    let count = cfg.sweep.count;
    // unsupported manifold/density pairs fail here, before any sampling
    reference_spectrum(&grid.manifold, &grid.density, count)
        .map_err(|e| CliError::Config(format!("manifold/density: {e}")))?;
    if let Some(j) = a.jobs {
        // a pool built earlier in the process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let result = eig_error_table(&grid, count)?;
    let verdicts = cfg.acceptance.as_ref().map(|acc| report::verdicts(acc, &result)).unwrap_or_default();
    report::print_table(&result);
    for v in &verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    if a.wants(Format::Csv) {
        report::write_report_csv(out_file(&a.out, "report.csv")?.1, &result)?;
    }
    if a.wants(Format::Json) {
        write_json(&a.out, "summary.json", &report::summary_json(&cfg, &grid, &result, &verdicts))?;
    }
    if a.wants(Format::Svg) {
        let (_, mut w) = out_file(&a.out, "error_vs_t.svg")?;
        report::write_error_svg(&mut w, &result)?;
    }
    Ok(if verdicts.iter().all(|v| v.passed) { 0 } else { 1 })
}

/// `f` at a point of `manifold`.
pub fn forcing_value(f: Forcing, manifold: &ManifoldModel, x: &Point) -> f64 {
    match f {
        Forcing::Zero => 0.0,
        Forcing::Coordinate => x[0],
        Forcing::Cosine(m) => {
            let s = manifold.coordinate(x);
            match manifold {
                ManifoldModel::Circle { .. } => (2.0 * std::f64::consts::PI * m as f64 * s).cos(),
                _ => (std::f64::consts::PI * m as f64 * s).cos(),
            }
        }
    }
}

/// Mean-removed closed-form solution when one is known: `cos(m pi s)` on a
/// uniform interval of length `h` solves `-u'' = f` with `u = f / (m pi / h)^2`.
fn analytic_solution(f: Forcing, cfg: &Config, cloud: &PointCloud, values: &[f64]) -> Option<Vec<f64>> {
    let (Forcing::Cosine(m), ManifoldModel::Interval { a, b }) = (f, cloud.manifold()) else {
        return None;
    };
    if m == 0 || cfg.density.form != "uniform" {
        return None;
    }
    let k = std::f64::consts::PI * m as f64 / (b - a);
    let mut u: Vec<f64> = values.iter().map(|v| v / (k * k)).collect();
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    u.iter_mut().for_each(|x| *x -= mean);
    Some(u)
}

pub fn poisson(a: &CommonArgs) -> Result<i32, CliError> {
    let p = sample_cloud(a)?;
    let forcing = p.cfg.forcing()?;
    let sys = assemble_with(&p.cloud, &p.cfg.kernel_spec()?, p.t, &p.cfg.assembly_options())?;
    let f: Vec<f64> = p
        .cloud
        .points()
        .iter()
        .map(|x| forcing_value(forcing, p.cloud.manifold(), x))
        .collect();
    let sol = match solve_poisson(&sys, &f) {
        Ok(s) => s,
        Err(pim_core::Error::NumericalFailure {
            message,
            residual_history,
        }) => {
            let (path, w) = out_file(&a.out, "poisson_residual_history.csv")?;
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["iteration", "relative_residual"]).map_err(|e| CliError::Failure(e.to_string()))?;
            for (k, r) in residual_history.iter().enumerate() {
                out.write_record([k.to_string(), r.to_string()]).map_err(|e| CliError::Failure(e.to_string()))?;
            }
            out.flush()?;
            return Err(CliError::Failure(format!("{message}; residual history in {}", path.display())));
        }
        Err(e) => return Err(e.into()),
    };
    let analytic = analytic_solution(forcing, &p.cfg, &p.cloud, &f);
    let analytic_error = analytic.as_ref().map(|u| {
        let num: f64 = u.iter().zip(&sol.u).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = u.iter().map(|a| a * a).sum();
        (num / den).sqrt()
    });
    println!("n = {}, t = {}, iterations = {}", sys.len(), p.t, sol.iterations);
    println!("residual: {:.3e}", sol.residual);
    println!("rhs projection applied: {}", sol.rhs_projection_applied);
    if let Some(e) = analytic_error {
        println!("relative error vs closed form: {e:.4e}");
    }
    if a.wants(Format::Csv) {
        io::write_poisson(out_file(&a.out, "poisson.csv")?.1, &p.cloud, &f, &sol.u)?;
    }
    if a.wants(Format::Json) {
        write_json(
            &a.out,
            "poisson_summary.json",
            &json!({
                "config": p.cfg,
                "resolved": {"n": sys.len(), "t": p.t, "seed": p.cfg.sample.seed},
                "residual": sol.residual,
                "iterations": sol.iterations,
                "rhs_projection_applied": sol.rhs_projection_applied,
                "analytic_relative_error": analytic_error,
                "converged": sol.residual < POISSON_ACCEPT,
            }),
        )?;
    }
    Ok(if sol.residual < POISSON_ACCEPT { 0 } else { 1 })
}
