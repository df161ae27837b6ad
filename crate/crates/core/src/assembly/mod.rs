//! Stiffness and mass matrices of the kernel pencil.
//!
//! For points `x_1..x_n`, bandwidth `t` and `r_ij = |x_i - x_j|^2 / 4t`:
//!
//! ```text
//! L_ij = -R(r_ij) / t            (i != j)
//! L_ii = -sum_{j != i} L_ij
//! B_ij = bar-R(r_ij)             (all i, j, including i = j)
//! ```
//!
//! Neither matrix carries the `1/n` or `(4 pi t)^{-k/2}` factors; both cancel
//! in the pencil `L u = lambda B u`. The normalized kernel-sum field
//! `w_{t,n}(x) = (4 pi t)^{-k/2} / n * sum_j R(|x - x_j|^2 / 4t)` is stored
//! at the sample points.

pub mod neighbors;

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;

use crate::geometry::{Point, PointCloud};
use crate::kernel::KernelSpec;
use crate::linalg::{dense, CsrMatrix};
use crate::{invalid, Result};

pub use neighbors::{brute_force, cell_list, NeighborLists};

/// Matrix storage chosen at assembly time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Storage {
    Dense,
    Sparse,
}

/// Size at or below which matrices are stored densely.
pub const DEFAULT_DENSE_THRESHOLD: usize = 512;
/// Clouds smaller than this use the brute-force neighbor search.
pub const BRUTE_FORCE_BELOW: usize = 512;

#[derive(Clone, Copy, Debug)]
pub struct AssemblyOptions {
    pub dense_threshold: usize,
    pub brute_force_below: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            brute_force_below: BRUTE_FORCE_BELOW,
        }
    }
}

/// Kernel normalization `C_t = (4 pi t)^{-k/2}`.
pub fn normalization_constant(t: f64, intrinsic_dim: usize) -> f64 {
    (4.0 * PI * t).powf(-(intrinsic_dim as f64) / 2.0)
}

/// Bandwidth heuristic `c n^{-2/(2k+7)}`.
pub fn auto_bandwidth(n: usize, intrinsic_dim: usize, c: f64) -> f64 {
    c * (n as f64).powf(-2.0 / (2 * intrinsic_dim + 7) as f64)
}

#[derive(Clone, Debug)]
enum Values {
    Dense(Mat<f64>),
    Sparse(CsrMatrix),
}

impl Values {
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Values::Dense(m) => m[(i, j)],
            Values::Sparse(m) => m.get(i, j),
        }
    }

    fn to_dense(&self) -> Mat<f64> {
        match self {
            Values::Dense(m) => m.clone(),
            Values::Sparse(m) => m.to_dense(),
        }
    }
}

/// Assembled kernel pencil on a point cloud.
#[derive(Clone, Debug)]
pub struct LaplacianSystem {
    cloud: PointCloud,
    kernel: KernelSpec,
    t: f64,
    storage: Storage,
    /// Off-diagonal stiffness entries, zero diagonal.
    stiffness_off: Values,
    stiffness_diag: Vec<f64>,
    mass: Values,
    /// Sorted neighbor lists (the stored off-diagonal pattern).
    neighbors: Vec<Vec<usize>>,
    w: Vec<f64>,
    component_of: Vec<usize>,
    n_components: usize,
}

/// Assembles with default options.
pub fn assemble(cloud: &PointCloud, kernel: &KernelSpec, t: f64) -> Result<LaplacianSystem> {
    assemble_with(cloud, kernel, t, &AssemblyOptions::default())
}

pub fn assemble_with(cloud: &PointCloud, kernel: &KernelSpec, t: f64, opts: &AssemblyOptions) -> Result<LaplacianSystem> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("bandwidth t must be positive, got {t}")));
    }
    let n = cloud.len();
    if n == 0 {
        return Err(invalid("cannot assemble an empty cloud"));
    }
    let lists = if n < opts.brute_force_below {
        brute_force(cloud.points(), t)
    } else {
        cell_list(cloud.points(), t)
    };

    struct Row {
        stiff: Vec<(usize, f64)>,
        mass: Vec<(usize, f64)>,
        diag: f64,
        kernel_sum: f64,
    }
    let bar0 = kernel.eval_bar_r(0.0);
    let r0 = kernel.eval_r(0.0);
    let rows: Vec<Row> = lists
        .par_iter()
        .enumerate()
        .map(|(i, list)| {
            let mut stiff = Vec::with_capacity(list.len());
            let mut mass = Vec::with_capacity(list.len() + 1);
            let mut inserted = false;
            for &(j, r) in list {
                if !inserted && j > i {
                    mass.push((i, bar0));
                    inserted = true;
                }
                stiff.push((j, -kernel.eval_r(r) / t));
                mass.push((j, kernel.eval_bar_r(r)));
            }
            if !inserted {
                mass.push((i, bar0));
            }
            let off_sum: f64 = stiff.iter().map(|&(_, v)| v).sum();
            let kernel_sum = list.iter().map(|&(_, r)| kernel.eval_r(r)).sum::<f64>() + r0;
            Row {
                stiff,
                mass,
                diag: -off_sum,
                kernel_sum,
            }
        })
        .collect();

    let c_t = normalization_constant(t, cloud.manifold().intrinsic_dim());
    let w = rows.iter().map(|r| c_t * r.kernel_sum / n as f64).collect();
    let stiffness_diag: Vec<f64> = rows.iter().map(|r| r.diag).collect();
    let neighbors: Vec<Vec<usize>> = lists.iter().map(|l| l.iter().map(|&(j, _)| j).collect()).collect();

    let (component_of, n_components) = components(n, &rows.iter().map(|r| &r.stiff).collect::<Vec<_>>());

    let storage = if n <= opts.dense_threshold {
        Storage::Dense
    } else {
        Storage::Sparse
    };
    let (stiff_rows, mass_rows): (Vec<_>, Vec<_>) = rows.into_iter().map(|r| (r.stiff, r.mass)).unzip();
    let (stiffness_off, mass) = match storage {
        Storage::Dense => {
            let mut s = Mat::zeros(n, n);
            let mut b = Mat::zeros(n, n);
            for (i, row) in stiff_rows.iter().enumerate() {
                for &(j, v) in row {
                    s[(i, j)] = v;
                }
            }
            for (i, row) in mass_rows.iter().enumerate() {
                for &(j, v) in row {
                    b[(i, j)] = v;
                }
            }
            (Values::Dense(s), Values::Dense(b))
        }
        Storage::Sparse => (
            Values::Sparse(CsrMatrix::from_sorted_rows(stiff_rows)),
            Values::Sparse(CsrMatrix::from_sorted_rows(mass_rows)),
        ),
    };

    Ok(LaplacianSystem {
        cloud: cloud.clone(),
        kernel: kernel.clone(),
        t,
        storage,
        stiffness_off,
        stiffness_diag,
        mass,
        neighbors,
        w,
        component_of,
        n_components,
    })
}

/// Connected components of the stiffness graph (nonzero off-diagonals).
fn components(n: usize, rows: &[&Vec<(usize, f64)>]) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row.iter() {
            if v != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[i] = label[r];
    }
    (out, next)
}

impl LaplacianSystem {
    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn storage(&self) -> Storage {
        self.storage
    }

    /// `w_{t,n}` at the sample points.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// True when the kernel graph has more than one connected component.
    pub fn disconnected(&self) -> bool {
        self.n_components > 1
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    /// Component label of each point, labels in order of first appearance.
    pub fn component_labels(&self) -> &[usize] {
        &self.component_of
    }

    /// Sorted off-diagonal neighbor indices of point `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// `C_t = (4 pi t)^{-k/2}`.
    pub fn normalization_constant(&self) -> f64 {
        normalization_constant(self.t, self.cloud.manifold().intrinsic_dim())
    }

    pub fn stiffness(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.stiffness_diag[i]
        } else {
            self.stiffness_off.get(i, j)
        }
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.mass.get(i, j)
    }

    /// `L u`; off-diagonal terms are summed in column order before the
    /// diagonal term, so constants map to exactly zero.
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let off: f64 = match &self.stiffness_off {
                    Values::Sparse(m) => {
                        let (cols, vals) = m.row(i);
                        cols.iter().zip(vals).map(|(&j, v)| v * u[j]).sum()
                    }
                    Values::Dense(m) => self.neighbors[i].iter().map(|&j| m[(i, j)] * u[j]).sum(),
                };
                off + self.stiffness_diag[i] * u[i]
            })
            .collect()
    }

    pub fn apply_mass(&self, u: &[f64]) -> Vec<f64> {
        match &self.mass {
            Values::Sparse(m) => m.matvec(u),
            Values::Dense(m) => dense::matvec(m, u),
        }
    }

    /// Row sums of `L` in the same order as [`Self::apply_stiffness`].
    pub fn stiffness_row_sums(&self) -> Vec<f64> {
        self.apply_stiffness(&vec![1.0; self.len()])
    }

    pub fn stiffness_dense(&self) -> Mat<f64> {
        let mut m = self.stiffness_off.to_dense();
        for (i, d) in self.stiffness_diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn mass_dense(&self) -> Mat<f64> {
        self.mass.to_dense()
    }

    /// `(i, j, L_ij)` for every stored entry, row-major with sorted columns.
    pub fn stiffness_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            let mut placed = false;
            for &j in &self.neighbors[i] {
                if !placed && j > i {
                    out.push((i, i, self.stiffness_diag[i]));
                    placed = true;
                }
                out.push((i, j, self.stiffness_off.get(i, j)));
            }
            if !placed {
                out.push((i, i, self.stiffness_diag[i]));
            }
        }
        out
    }

    /// `(i, j, B_ij)` for every stored entry.
    pub fn mass_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            let mut placed = false;
            for &j in &self.neighbors[i] {
                if !placed && j > i {
                    out.push((i, i, self.mass.get(i, i)));
                    placed = true;
                }
                out.push((i, j, self.mass.get(i, j)));
            }
            if !placed {
                out.push((i, i, self.mass.get(i, i)));
            }
        }
        out
    }

    /// Largest absolute row sum of `B`.
    pub fn mass_norm_inf(&self) -> f64 {
        match &self.mass {
            Values::Sparse(m) => m.norm_inf(),
            Values::Dense(m) => (0..self.len())
                .map(|i| (0..self.len()).map(|j| m[(i, j)].abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    /// `(j, R(r_j), bar-R(r_j))` for all samples within the support of `x`.
    pub fn kernel_terms_at(&self, x: &Point) -> Vec<(usize, f64, f64)> {
        self.cloud
            .points()
            .iter()
            .enumerate()
            .filter_map(|(j, y)| {
                let r = neighbors::scaled_distance(x, y, self.t);
                (r <= 1.0).then(|| (j, self.kernel.eval_r(r), self.kernel.eval_bar_r(r)))
            })
            .collect()
    }
}

/// `w_{t,n}` at arbitrary query points.
pub fn w_field(cloud: &PointCloud, kernel: &KernelSpec, t: f64, queries: &[Point]) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("bandwidth t must be positive, got {t}")));
    }
    let c_t = normalization_constant(t, cloud.manifold().intrinsic_dim());
    let n = cloud.len() as f64;
    Ok(queries
        .par_iter()
        .map(|x| {
            let s: f64 = cloud
                .points()
                .iter()
                .map(|y| kernel.eval_r(neighbors::scaled_distance(x, y, t)))
                .sum();
            c_t * s / n
        })
        .collect())
}
