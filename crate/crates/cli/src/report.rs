use std::io::Write;

use serde::Serialize;
use serde_json::json;

use pim_core::analysis::{SpectralReport, SweepGrid};

use crate::config::{AcceptanceConfig, Config};
use crate::CliError;

pub const REPORT_COLUMNS: [&str; 11] = [
    "n",
    "t",
    "seed",
    "eig_index",
    "lambda_discrete",
    "lambda_reference",
    "abs_error",
    "subspace_angle",
    "coercivity",
    "discrepancy",
    "wall_ms",
];

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".into(), |x| x.to_string())
}

/// One row per run and eigenvalue index; failed runs keep their rows with
/// `NaN` measurements.
pub fn write_report_csv<W: Write>(w: W, report: &SpectralReport) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Failure(format!("report.csv: {e}"));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_COLUMNS).map_err(err)?;
    for cell in &report.cells {
        for k in 0..report.count {
            out.write_record([
                cell.n.to_string(),
                cell.t.to_string(),
                cell.seed.to_string(),
                k.to_string(),
                opt(cell.eigenvalues.get(k).copied()),
                report.reference[k].to_string(),
                opt(cell.abs_errors.get(k).copied()),
                opt(cell.angles.get(k).copied().flatten()),
                opt(cell.coercivity),
                opt(cell.discrepancy),
                format!("{:.3}", cell.wall_ms),
            ])
            .map_err(err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn verdicts(acc: &AcceptanceConfig, report: &SpectralReport) -> Vec<Verdict> {
    let mut out = Vec::new();
    let valid = |i: usize| i < report.count;
    if let Some(bound) = acc.max_relative_error {
        for &i in acc.indices.iter().filter(|&&i| valid(i)) {
            let reference = report.reference[i];
            let worst = report
                .summaries
                .iter()
                .map(|s| {
                    let e = (s.mean_eigenvalues[i] - reference).abs();
                    if reference != 0.0 {
                        e / reference.abs()
                    } else {
                        e
                    }
                })
                .fold(0.0f64, |m, e| if e.is_nan() || m.is_nan() { f64::NAN } else { m.max(e) });
            out.push(Verdict {
                name: format!("relative_error[{i}]"),
                passed: worst < bound,
                detail: format!("worst {worst:.4} vs bound {bound}"),
            });
        }
    }
    if let Some(bound) = acc.max_angle {
        for &i in acc.indices.iter().filter(|&&i| valid(i)) {
            let angles: Vec<Option<f64>> = report.cells.iter().map(|c| c.angles.get(i).copied().flatten()).collect();
            let missing = angles.iter().any(|a| a.is_none());
            let worst = angles.iter().flatten().cloned().fold(0.0f64, f64::max);
            out.push(Verdict {
                name: format!("subspace_angle[{i}]"),
                passed: !missing && worst < bound,
                detail: if missing {
                    "angle missing in at least one run".into()
                } else {
                    format!("worst {worst:.4} rad vs bound {bound}")
                },
            });
        }
    }
    if acc.monotone {
        for &i in acc.indices.iter().filter(|&&i| valid(i)) {
            let errs: Vec<f64> = report.summaries.iter().map(|s| s.mean_abs_error[i]).collect();
            let ok = errs.iter().all(|e| e.is_finite()) && errs.windows(2).all(|w| w[1] <= w[0]);
            out.push(Verdict {
                name: format!("monotone[{i}]"),
                passed: ok,
                detail: format!("{errs:?}"),
            });
        }
    }
    for &i in acc.indices.iter().filter(|&&i| !valid(i)) {
        out.push(Verdict {
            name: format!("index[{i}]"),
            passed: false,
            detail: format!("index beyond sweep.count = {}", report.count),
        });
    }
    out
}

pub fn summary_json(cfg: &Config, grid: &SweepGrid, report: &SpectralReport, verdicts: &[Verdict]) -> serde_json::Value {
    json!({
        "config": cfg,
        "resolved": {
            "n_values": grid.n_values,
            "t_values": grid.t_values,
            "seeds": grid.seeds,
            "schedule": grid.schedule,
            "kernel": grid.kernel.name(),
            "manifold": grid.manifold,
        },
        "reference": report.reference,
        "cells": report.summaries,
        "failures": report.cells.iter().filter_map(|c| c.failure.as_ref().map(|f| json!({"n": c.n, "t": c.t, "seed": c.seed, "error": f}))).collect::<Vec<_>>(),
        "w_range": report.cells.iter().map(|c| json!({"n": c.n, "t": c.t, "seed": c.seed, "w_min": c.w_min, "w_max": c.w_max})).collect::<Vec<_>>(),
        "fits": {"error_vs_t": report.t_fits, "error_vs_n": report.n_fits},
        "acceptance": verdicts,
    })
}

pub fn print_table(report: &SpectralReport) {
    println!("{:>8} {:>10} {:>5} {:>16} {:>16} {:>12}", "n", "t", "index", "mean lambda", "reference", "mean |err|");
    for s in &report.summaries {
        for k in 0..report.count {
            println!(
                "{:>8} {:>10} {:>5} {:>16.8e} {:>16.8e} {:>12.4e}",
                s.n, s.t, k, s.mean_eigenvalues[k], report.reference[k], s.mean_abs_error[k]
            );
        }
    }
    for f in &report.t_fits {
        if !f.fit.insufficient_points {
            println!("error ~ t^{:.3} for index {} (R^2 = {:.3})", f.fit.slope, f.eig_index, f.fit.r_squared);
        }
    }
    for f in &report.n_fits {
        if !f.fit.insufficient_points {
            println!("error ~ n^{:.3} for index {} (R^2 = {:.3})", f.fit.slope, f.eig_index, f.fit.r_squared);
        }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log plot of the seed-mean error against `t` at the largest `n`.
pub fn write_error_svg<W: Write>(w: &mut W, report: &SpectralReport) -> Result<(), CliError> {
    let (width, height, margin) = (640.0, 480.0, 60.0);
    let max_n = report.summaries.iter().map(|s| s.n).max().unwrap_or(0);
    let line: Vec<_> = report.summaries.iter().filter(|s| s.n == max_n).collect();
    let mut pts: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for k in 1..report.count {
        let series: Vec<(f64, f64)> = line
            .iter()
            .map(|s| (s.t, s.mean_abs_error[k]))
            .filter(|(t, e)| *t > 0.0 && *e > 0.0 && e.is_finite())
            .map(|(t, e)| (t.log10(), e.log10()))
            .collect();
        pts.push((k, series));
    }
    let all: Vec<(f64, f64)> = pts.iter().flat_map(|(_, s)| s.iter().cloned()).collect();
    let (x0, x1) = bounds(all.iter().map(|p| p.0));
    let (y0, y1) = bounds(all.iter().map(|p| p.1));
    let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (width - 2.0 * margin);
    let sy = |y: f64| height - margin - (y - y0) / (y1 - y0) * (height - 2.0 * margin);

    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#)?;
    writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        w,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = margin,
        b = height - margin,
        r = width - margin
    )?;
    for d in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let x = d as f64;
        if x >= x0 && x <= x1 {
            writeln!(w, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">1e{d}</text>"#, sx(x), height - margin + 18.0)?;
        }
    }
    for d in (y0.floor() as i32)..=(y1.ceil() as i32) {
        let y = d as f64;
        if y >= y0 && y <= y1 {
            writeln!(w, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{d}</text>"#, margin - 6.0, sy(y) + 4.0)?;
        }
    }
    writeln!(w, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text>"#, width / 2.0, height - 15.0)?;
    writeln!(
        w,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">mean |lambda error| (n = {max_n})</text>"#,
        height / 2.0,
        height / 2.0
    )?;
    for (slot, (k, series)) in pts.iter().enumerate() {
        let color = PALETTE[slot % PALETTE.len()];
        if series.len() > 1 {
            let path: Vec<String> = series.iter().map(|(x, y)| format!("{:.1},{:.1}", sx(*x), sy(*y))).collect();
            writeln!(w, r#"<polyline points="{}" fill="none" stroke="{color}"/>"#, path.join(" "))?;
        }
        for (x, y) in series {
            writeln!(w, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(*x), sy(*y))?;
        }
        writeln!(
            w,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">lambda {k}</text>"#,
            width - margin + 5.0,
            margin + 15.0 * slot as f64
        )?;
    }
    writeln!(w, "</svg>")?;
    Ok(())
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}
