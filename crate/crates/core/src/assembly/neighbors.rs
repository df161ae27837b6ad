//! Fixed-radius neighbor search: brute force and a uniform cell list.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::geometry::{squared_distance, Point};

/// For every point, the sorted indices `j != i` with `|x_i - x_j|^2 / 4t <= 1`
/// and the scaled squared distance `r_ij`.
pub type NeighborLists = Vec<Vec<(usize, f64)>>;

#[inline]
pub(crate) fn scaled_distance(x: &Point, y: &Point, t: f64) -> f64 {
    squared_distance(x, y) / (4.0 * t)
}

pub fn brute_force(points: &[Point], t: f64) -> NeighborLists {
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, y)| (j, scaled_distance(x, y, t)))
                .filter(|&(_, r)| r <= 1.0)
                .collect()
        })
        .collect()
}

type CellKey = [i64; 3];

/// Uniform grid with cell side `2 sqrt(t)`, the kernel support radius.
pub struct CellList {
    cell: f64,
    cells: HashMap<CellKey, Vec<usize>>,
}

impl CellList {
    pub fn new(points: &[Point], t: f64) -> Self {
        let cell = 2.0 * t.sqrt();
        let mut cells: HashMap<CellKey, Vec<usize>> = HashMap::new();
        for (i, x) in points.iter().enumerate() {
            cells.entry(key(x, cell)).or_default().push(i);
        }
        Self { cell, cells }
    }

    /// Candidate indices from the 27 cells around `x` (unsorted).
    pub fn candidates<'a>(&'a self, x: &Point) -> impl Iterator<Item = usize> + 'a {
        let k = key(x, self.cell);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1).flat_map(move |dz| {
                    self.cells
                        .get(&[k[0] + dx, k[1] + dy, k[2] + dz])
                        .into_iter()
                        .flatten()
                        .copied()
                })
            })
        })
    }
}

fn key(x: &Point, cell: f64) -> CellKey {
    [
        (x[0] / cell).floor() as i64,
        (x[1] / cell).floor() as i64,
        (x[2] / cell).floor() as i64,
    ]
}

pub fn cell_list(points: &[Point], t: f64) -> NeighborLists {
    let grid = CellList::new(points, t);
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut row: Vec<(usize, f64)> = grid
                .candidates(x)
                .filter(|&j| j != i)
                .map(|j| (j, scaled_distance(x, &points[j], t)))
                .filter(|&(_, r)| r <= 1.0)
                .collect();
            row.sort_unstable_by_key(|&(j, _)| j);
            row
        })
        .collect()
}
