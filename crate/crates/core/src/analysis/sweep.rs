use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{coercivity_constant, discrepancy, fit_power_law, principal_angle, PowerLawFit, DEFAULT_CENTERS};
use crate::assembly::{assemble_with, AssemblyOptions, LaplacianSystem};
use crate::geometry::{reference_spectrum, sample, DensitySpec, ManifoldModel, ReferenceSpectrum, MAX_REFERENCE_COUNT};
use crate::kernel::KernelSpec;
use crate::solver::{group_by_gap, solve_eig, EigResult};
use crate::{invalid, Error, Result};

/// Largest admissible bandwidth.
pub const T_MAX: f64 = 0.25;

/// How `n_values` and `t_values` combine into cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// Every `(n, t)` pair.
    Cartesian,
    /// `(n_values[k], t_values[k])`.
    Zipped,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub angles: bool,
    pub coercivity: bool,
    pub discrepancy: bool,
    pub discrepancy_centers: usize,
    pub assembly: AssemblyOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            angles: true,
            coercivity: true,
            discrepancy: true,
            discrepancy_centers: DEFAULT_CENTERS,
            assembly: AssemblyOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepGrid {
    pub manifold: ManifoldModel,
    pub density: DensitySpec,
    pub kernel: KernelSpec,
    /// Ascending.
    pub n_values: Vec<usize>,
    /// Descending, each in `(0, T_MAX]`.
    pub t_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub schedule: Schedule,
    pub options: SweepOptions,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.t_values.is_empty() || self.seeds.is_empty() {
            return Err(invalid("sweep grid needs at least one n, one t and one seed"));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) || self.n_values[0] == 0 {
            return Err(invalid("n values must be positive and strictly ascending"));
        }
        if self.t_values.windows(2).any(|w| w[0] <= w[1]) {
            return Err(invalid("t values must be strictly descending"));
        }
        if let Some(t) = self.t_values.iter().find(|&&t| !(t > 0.0 && t <= T_MAX)) {
            return Err(invalid(format!("t = {t} outside (0, {T_MAX}]")));
        }
        if self.schedule == Schedule::Zipped && self.n_values.len() != self.t_values.len() {
            return Err(invalid("zipped schedule needs as many t values as n values"));
        }
        self.manifold.validate()?;
        if self.density.manifold() != &self.manifold {
            return Err(invalid("density is defined on a different manifold"));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<(usize, f64)> {
        match self.schedule {
            Schedule::Cartesian => self
                .n_values
                .iter()
                .flat_map(|&n| self.t_values.iter().map(move |&t| (n, t)))
                .collect(),
            Schedule::Zipped => self.n_values.iter().cloned().zip(self.t_values.iter().cloned()).collect(),
        }
    }
}

/// One sample-assemble-solve run.
#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub n: usize,
    pub t: f64,
    pub seed: u64,
    pub eigenvalues: Vec<f64>,
    pub abs_errors: Vec<f64>,
    /// Angle of the reference multiplicity group containing each index;
    /// `None` when the group is cut by `count` or the angle failed.
    pub angles: Vec<Option<f64>>,
    pub coercivity: Option<f64>,
    pub discrepancy: Option<f64>,
    pub w_min: f64,
    pub w_max: f64,
    pub regularization: f64,
    pub wall_ms: f64,
    pub failure: Option<String>,
}

/// Seed aggregate of one `(n, t)` cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub t: f64,
    pub seeds_ok: usize,
    /// Mean over seeds of `|lambda_i^{t,n} - lambda_i|`, `NaN` without data.
    pub mean_abs_error: Vec<f64>,
    pub mean_eigenvalues: Vec<f64>,
    pub median_discrepancy: Option<f64>,
    pub mean_coercivity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexFit {
    pub eig_index: usize,
    #[serde(flatten)]
    pub fit: PowerLawFit,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub count: usize,
    pub reference: Vec<f64>,
    pub cells: Vec<CellResult>,
    pub summaries: Vec<CellSummary>,
    /// Error against `t` at the largest `n`.
    pub t_fits: Vec<IndexFit>,
    /// Error against `n` at the smallest `t` (cartesian) or along the
    /// zipped ladder.
    pub n_fits: Vec<IndexFit>,
}

/// Runs every cell and seed of `grid`, computing `count` eigenpairs each.
pub fn eig_error_table(grid: &SweepGrid, count: usize) -> Result<SpectralReport> {
    grid.validate()?;
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    let want = (count + 4).min(MAX_REFERENCE_COUNT).max(count);
    let reference = reference_spectrum(&grid.manifold, &grid.density, want)?;
    if reference.len() < count {
        return Err(Error::UnsupportedConfiguration(format!(
            "reference spectrum provides {} eigenvalues, {count} requested",
            reference.len()
        )));
    }
    let groups: Vec<Vec<usize>> = group_by_gap(reference.eigenvalues())
        .into_iter()
        .filter(|g| g.iter().all(|&k| k < count) && !g.contains(&(reference.len() - 1)))
        .collect();

    let cells = grid.cells();
    let jobs: Vec<(usize, f64, u64)> = cells
        .iter()
        .flat_map(|&(n, t)| grid.seeds.iter().map(move |&s| (n, t, s)))
        .collect();
    let results: Vec<CellResult> = jobs
        .par_iter()
        .map(|&(n, t, seed)| run_cell(grid, &reference, &groups, count, n, t, seed))
        .collect();

    let summaries: Vec<CellSummary> = cells
        .iter()
        .map(|&(n, t)| summarize(n, t, count, results.iter().filter(|r| r.n == n && r.t == t)))
        .collect();

    let max_n = *grid.n_values.last().unwrap();
    let min_t = *grid.t_values.last().unwrap();
    let t_line: Vec<&CellSummary> = summaries.iter().filter(|s| s.n == max_n).collect();
    let n_line: Vec<&CellSummary> = match grid.schedule {
        Schedule::Cartesian => summaries.iter().filter(|s| s.t == min_t).collect(),
        Schedule::Zipped => summaries.iter().collect(),
    };
    let fits = |line: &[&CellSummary], x: &dyn Fn(&CellSummary) -> f64| -> Vec<IndexFit> {
        (1..count)
            .map(|i| {
                let xs: Vec<f64> = line.iter().map(|s| x(s)).collect();
                let ys: Vec<f64> = line.iter().map(|s| s.mean_abs_error[i]).collect();
                IndexFit {
                    eig_index: i,
                    fit: fit_power_law(&xs, &ys),
                }
            })
            .collect()
    };
    let t_fits = fits(&t_line, &|s| s.t);
    let n_fits = fits(&n_line, &|s| s.n as f64);

    Ok(SpectralReport {
        count,
        reference: reference.eigenvalues()[..count].to_vec(),
        cells: results,
        summaries,
        t_fits,
        n_fits,
    })
}

fn run_cell(
    grid: &SweepGrid,
    reference: &ReferenceSpectrum,
    groups: &[Vec<usize>],
    count: usize,
    n: usize,
    t: f64,
    seed: u64,
) -> CellResult {
    let start = Instant::now();
    let mut out = CellResult {
        n,
        t,
        seed,
        eigenvalues: vec![],
        abs_errors: vec![],
        angles: vec![],
        coercivity: None,
        discrepancy: None,
        w_min: f64::NAN,
        w_max: f64::NAN,
        regularization: 0.0,
        wall_ms: 0.0,
        failure: None,
    };
    if let Err(e) = fill_cell(grid, reference, groups, count, &mut out) {
        out.failure = Some(e.to_string());
        out.eigenvalues.clear();
        out.abs_errors.clear();
        out.angles.clear();
    }
    out.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    out
}

fn fill_cell(
    grid: &SweepGrid,
    reference: &ReferenceSpectrum,
    groups: &[Vec<usize>],
    count: usize,
    out: &mut CellResult,
) -> Result<()> {
    let cloud = sample(&grid.manifold, &grid.density, out.n, out.seed)?;
    let sys = assemble_with(&cloud, &grid.kernel, out.t, &grid.options.assembly)?;
    out.w_min = sys.w().iter().cloned().fold(f64::INFINITY, f64::min);
    out.w_max = sys.w().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let eig = solve_eig(&sys, count)?;
    out.regularization = eig.regularization_applied;
    out.abs_errors = eig
        .eigenvalues
        .iter()
        .zip(reference.eigenvalues())
        .map(|(a, b)| (a - b).abs())
        .collect();
    out.eigenvalues = eig.eigenvalues.clone();
    out.angles = vec![None; eig.len()];
    if grid.options.angles {
        for g in groups {
            if g.iter().any(|&k| k >= eig.len()) {
                continue;
            }
            if let Ok(a) = group_angle(&sys, &eig, g, reference) {
                for &k in g {
                    out.angles[k] = Some(a);
                }
            }
        }
    }
    if grid.options.coercivity {
        out.coercivity = Some(coercivity_constant(&sys)?);
    }
    if grid.options.discrepancy {
        out.discrepancy = Some(discrepancy(
            &cloud,
            &grid.kernel,
            out.t,
            &grid.density,
            grid.options.discrepancy_centers,
        )?);
    }
    Ok(())
}

fn group_angle(sys: &LaplacianSystem, eig: &EigResult, group: &[usize], reference: &ReferenceSpectrum) -> Result<f64> {
    let pts = sys.cloud().points();
    let discrete: Vec<Vec<f64>> = group.iter().map(|&k| eig.eigenvectors[k].clone()).collect();
    let analytic: Vec<Vec<f64>> = group
        .iter()
        .map(|&k| pts.iter().map(|x| reference.eval(k, x)).collect())
        .collect();
    principal_angle(sys, &discrete, &analytic)
}

fn summarize<'a>(n: usize, t: f64, count: usize, runs: impl Iterator<Item = &'a CellResult>) -> CellSummary {
    let ok: Vec<&CellResult> = runs.filter(|r| r.failure.is_none()).collect();
    let mean_of = |f: &dyn Fn(&CellResult) -> Option<f64>| -> f64 {
        let vals: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let mean_abs_error = (0..count).map(|i| mean_of(&|r| r.abs_errors.get(i).copied())).collect();
    let mean_eigenvalues = (0..count).map(|i| mean_of(&|r| r.eigenvalues.get(i).copied())).collect();
    let mut disc: Vec<f64> = ok.iter().filter_map(|r| r.discrepancy).collect();
    let median_discrepancy = median(&mut disc);
    let coer = mean_of(&|r| r.coercivity);
    CellSummary {
        n,
        t,
        seeds_ok: ok.len(),
        mean_abs_error,
        mean_eigenvalues,
        median_discrepancy,
        mean_coercivity: (!coer.is_nan()).then_some(coer),
    }
}

pub(crate) fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}
