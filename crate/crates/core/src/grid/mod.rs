//! Rectilinear grids over a box domain, their cell partitions, and the
//! weighted graph they induce.
//!
//! Cells are numbered in row-major order (last axis fastest). Sides are
//! enumerated axis by axis, and within an axis by the linear index of the
//! lower cell; each side becomes one edge oriented from the lower cell to
//! the upper cell.

mod par;
mod pcr;

pub use par::{kappa, kappa_inv, par_divergence, ParField};
pub(crate) use pcr::subgradient_from_box;
pub use pcr::{average, iota, iota_inv, sample_subgradient, PcrFunction};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
}

impl Grid {
    /// Per-axis breakpoints, each list strictly increasing and containing
    /// both domain endpoints.
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Grid("a grid needs at least one axis".into()));
        }
        for (i, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::Grid(format!(
                    "axis {i} has {} breakpoints, need at least 2",
                    axis.len()
                )));
            }
            if axis.iter().any(|x| !x.is_finite()) {
                return Err(Error::Grid(format!("axis {i} has a non-finite breakpoint")));
            }
            if let Some(k) = axis.windows(2).position(|p| !(p[0] < p[1])) {
                return Err(Error::Grid(format!(
                    "axis {i} is not strictly increasing at position {k}"
                )));
            }
        }
        Ok(Self { axes })
    }

    /// `shape[i]` equal cells along axis `i` of `(a_i, b_i)`.
    pub fn uniform(domain: &[(f64, f64)], shape: &[usize]) -> Result<Self> {
        if domain.len() != shape.len() {
            return Err(Error::Grid(format!(
                "{} extents for {} axes",
                domain.len(),
                shape.len()
            )));
        }
        let axes = domain
            .iter()
            .zip(shape)
            .map(|(&(a, b), &n)| {
                let mut axis: Vec<f64> =
                    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
                if let Some(last) = axis.last_mut() {
                    *last = b;
                }
                axis
            })
            .collect();
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &[f64] {
        &self.axes[i]
    }

    /// Number of cells along each axis.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len() - 1).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.len() - 1).product()
    }

    /// `(a_i, b_i)` per axis.
    pub fn domain(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a[0], a[a.len() - 1])).collect()
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let shape = self.shape();
        let mut strides = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        strides
    }

    /// Multi-index of cell `k`.
    pub fn cell_index(&self, k: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        let mut rest = k;
        for i in (0..shape.len()).rev() {
            idx[i] = rest % shape[i];
            rest /= shape[i];
        }
        idx
    }

    pub fn cell_volume(&self, k: usize) -> f64 {
        self.cell_index(k)
            .iter()
            .zip(&self.axes)
            .map(|(&j, axis)| axis[j + 1] - axis[j])
            .product()
    }

    /// Volumes of all cells in row-major order.
    pub fn cell_volumes(&self) -> Vec<f64> {
        let lengths: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|a| a.windows(2).map(|p| p[1] - p[0]).collect())
            .collect();
        let mut vols = vec![1.0];
        for len in &lengths {
            vols = vols
                .iter()
                .flat_map(|v| len.iter().map(move |l| v * l))
                .collect();
        }
        vols
    }

    /// Longest diagonal over all cells.
    pub fn max_diagonal(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| {
                let m = a.windows(2).fold(0.0_f64, |m, p| m.max(p[1] - p[0]));
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// For each axis, the coarse interval containing every fine interval of
    /// `fine`. Fails unless `fine` contains every breakpoint of `self`.
    pub(crate) fn refinement_map(&self, fine: &Grid) -> Result<Vec<Vec<usize>>> {
        if fine.dim() != self.dim() {
            return Err(Error::Refinement(format!(
                "dimension {} vs {}",
                fine.dim(),
                self.dim()
            )));
        }
        let mut maps = Vec::with_capacity(self.dim());
        for (i, (coarse, fine_axis)) in self.axes.iter().zip(&fine.axes).enumerate() {
            let extent = coarse[coarse.len() - 1] - coarse[0];
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * extent.abs().max(1.0);
            if !close(coarse[0], fine_axis[0])
                || !close(coarse[coarse.len() - 1], fine_axis[fine_axis.len() - 1])
            {
                return Err(Error::Refinement(format!(
                    "axis {i} covers a different interval"
                )));
            }
            let mut map = Vec::with_capacity(fine_axis.len() - 1);
            let mut c = 0;
            for f in 0..fine_axis.len() - 1 {
                while c + 1 < coarse.len() - 1 && fine_axis[f] >= coarse[c + 1] - 1e-12 * extent {
                    c += 1;
                }
                map.push(c);
            }
            // every interior coarse breakpoint must coincide with a fine one
            for (ci, &x) in coarse.iter().enumerate().skip(1).take(coarse.len() - 2) {
                if !fine_axis.iter().any(|&y| close(x, y)) {
                    return Err(Error::Refinement(format!(
                        "breakpoint {x} (index {ci}) of axis {i} is missing from the finer grid"
                    )));
                }
            }
            maps.push(map);
        }
        Ok(maps)
    }
}

/// One interface between two neighbouring cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Side {
    pub lower: usize,
    pub upper: usize,
    /// Axis the side is orthogonal to.
    pub axis: usize,
    /// `(d-1)`-dimensional measure; 1 when `d = 1`.
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    grid: Grid,
    volumes: Vec<f64>,
    sides: Vec<Side>,
}

impl Partition {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn cell_count(&self) -> usize {
        self.volumes.len()
    }

    /// Position of the side between `lower` and its upper neighbour along
    /// `axis` in [`Partition::sides`].
    pub fn side_index(&self, axis: usize, lower: usize) -> usize {
        side_index(&self.grid, axis, lower)
    }
}

pub(crate) fn side_index(grid: &Grid, axis: usize, lower: usize) -> usize {
    let shape = grid.shape();
    let total = grid.cell_count();
    let before: usize = (0..axis).map(|b| total / shape[b] * (shape[b] - 1)).sum();
    let stride = grid.strides()[axis];
    let block = stride * shape[axis];
    let (outer, rem) = (lower / block, lower % block);
    before + outer * (shape[axis] - 1) * stride + rem
}

pub fn build_partition(grid: &Grid) -> Partition {
    let volumes = grid.cell_volumes();
    let shape = grid.shape();
    let strides = grid.strides();
    let lengths: Vec<Vec<f64>> = grid
        .axes()
        .iter()
        .map(|a| a.windows(2).map(|p| p[1] - p[0]).collect())
        .collect();
    let mut sides = Vec::new();
    for axis in 0..grid.dim() {
        for k in 0..volumes.len() {
            let idx = grid.cell_index(k);
            if idx[axis] + 1 >= shape[axis] {
                continue;
            }
            let measure: f64 = (0..grid.dim())
                .filter(|&i| i != axis)
                .map(|i| lengths[i][idx[i]])
                .product();
            sides.push(Side {
                lower: k,
                upper: k + strides[axis],
                axis,
                measure,
            });
        }
    }
    Partition {
        grid: grid.clone(),
        volumes,
        sides,
    }
}

/// Graph with one vertex per cell (weight = volume) and one edge per side
/// (weight = side measure).
pub fn build_graph(partition: &Partition) -> WeightedGraph {
    let edges = partition.sides.iter().map(|s| (s.lower, s.upper)).collect();
    let weights = partition.sides.iter().map(|s| s.measure).collect();
    WeightedGraph::new(partition.volumes.clone(), edges, weights)
        .expect("partition graphs are valid by construction")
}

/// Splits every interval into `factor` equal parts, keeping the original
/// breakpoints.
pub fn refine_grid(grid: &Grid, factor: usize) -> Result<Grid> {
    if factor < 2 {
        return Err(Error::Grid(format!(
            "refinement factor must be >= 2, got {factor}"
        )));
    }
    let axes = grid
        .axes()
        .iter()
        .map(|axis| {
            let mut out = Vec::with_capacity((axis.len() - 1) * factor + 1);
            for p in axis.windows(2) {
                out.push(p[0]);
                for m in 1..factor {
                    out.push(p[0] + (p[1] - p[0]) * m as f64 / factor as f64);
                }
            }
            out.push(axis[axis.len() - 1]);
            out
        })
        .collect();
    Grid::new(axes)
}

/// Keeps every `step`-th breakpoint of each axis together with the last one,
/// so the result is nested in `grid`.
pub fn coarsen_grid(grid: &Grid, step: usize) -> Result<Grid> {
    if step == 0 {
        return Err(Error::Grid("coarsening step must be >= 1".into()));
    }
    let axes = grid
        .axes()
        .iter()
        .map(|axis| {
            let last = axis.len() - 1;
            let mut out: Vec<f64> = axis.iter().copied().step_by(step).collect();
            if last % step != 0 {
                out.push(axis[last]);
            }
            out
        })
        .collect();
    Grid::new(axes)
}
