//! Piecewise affine vector fields whose `i`-th component is affine in `x_i`
//! on every cell, continuous in `x_i`, and zero on the two domain faces
//! orthogonal to axis `i`.

use super::{build_partition, side_index, Grid, PcrFunction};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParField {
    grid: Grid,
    /// `slopes[k * d + i]` is `c_i^k`.
    slopes: Vec<f64>,
    /// `offsets[k * d + i]` is `d_i^k`, the value on the lower face of cell
    /// `k` along axis `i`.
    offsets: Vec<f64>,
}

impl ParField {
    /// Builds a field from per-cell coefficients, checking continuity and
    /// the boundary condition to a relative `1e-10`.
    pub fn new(grid: Grid, slopes: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        let len = grid.cell_count() * grid.dim();
        check_len("field slopes", len, slopes.len())?;
        check_len("field offsets", len, offsets.len())?;
        let field = Self {
            grid,
            slopes,
            offsets,
        };
        field.check()?;
        Ok(field)
    }

    pub fn zero(grid: Grid) -> Self {
        let len = grid.cell_count() * grid.dim();
        Self {
            grid,
            slopes: vec![0.0; len],
            offsets: vec![0.0; len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `(c_i^k, d_i^k)`: component `i` on cell `k` is
    /// `c_i^k (x_i - l) + d_i^k` with `l` the cell's lower breakpoint.
    pub fn coefficients(&self, cell: usize, axis: usize) -> (f64, f64) {
        let at = cell * self.grid.dim() + axis;
        (self.slopes[at], self.offsets[at])
    }

    /// Component `axis` on cell `cell`, evaluated at coordinate `x` along
    /// that axis.
    pub fn component(&self, cell: usize, axis: usize, x: f64) -> f64 {
        let (c, d) = self.coefficients(cell, axis);
        c * (x - self.lower(cell, axis)) + d
    }

    fn lower(&self, cell: usize, axis: usize) -> f64 {
        self.grid.axis(axis)[self.grid.cell_index(cell)[axis]]
    }

    /// Left and right face values of component `axis` on `cell`.
    fn face_values(&self, cell: usize, axis: usize) -> (f64, f64) {
        let j = self.grid.cell_index(cell)[axis];
        let xs = self.grid.axis(axis);
        let (c, d) = self.coefficients(cell, axis);
        (d, d + c * (xs[j + 1] - xs[j]))
    }

    fn check(&self) -> Result<()> {
        let scale = (0..self.grid.cell_count())
            .flat_map(|k| (0..self.grid.dim()).map(move |i| (k, i)))
            .map(|(k, i)| {
                let (l, r) = self.face_values(k, i);
                l.abs().max(r.abs())
            })
            .fold(1.0_f64, f64::max);
        let tol = 1e-10 * scale;
        let shape = self.grid.shape();
        let strides = self.grid.strides();
        for k in 0..self.grid.cell_count() {
            let idx = self.grid.cell_index(k);
            for axis in 0..self.grid.dim() {
                let (left, right) = self.face_values(k, axis);
                if idx[axis] == 0 && left.abs() > tol {
                    return Err(Error::Invariant(format!(
                        "component {axis} is {left} on the lower domain face at cell {k}"
                    )));
                }
                if idx[axis] + 1 == shape[axis] {
                    if right.abs() > tol {
                        return Err(Error::Invariant(format!(
                            "component {axis} is {right} on the upper domain face at cell {k}"
                        )));
                    }
                } else {
                    let (next_left, _) = self.face_values(k + strides[axis], axis);
                    if (next_left - right).abs() > tol {
                        return Err(Error::Invariant(format!(
                            "component {axis} jumps from {right} to {next_left} across the side above cell {k}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Normal component of the field on every side, with the normal pointing
/// against the edge orientation (from the upper cell towards the lower
/// one).
pub fn kappa(field: &ParField) -> Vec<f64> {
    let partition = build_partition(&field.grid);
    partition
        .sides()
        .iter()
        .map(|s| {
            let (_, below) = field.face_values(s.lower, s.axis);
            let (above, _) = field.face_values(s.upper, s.axis);
            -0.5 * (below + above)
        })
        .collect()
}

/// The unique field whose side values are given by `h`, affine between
/// consecutive faces and zero on the domain boundary.
pub fn kappa_inv(h: &[f64], grid: &Grid) -> Result<ParField> {
    let partition = build_partition(grid);
    check_len("edge function", partition.sides().len(), h.len())?;
    let d = grid.dim();
    let shape = grid.shape();
    let strides = grid.strides();
    let mut slopes = vec![0.0; grid.cell_count() * d];
    let mut offsets = vec![0.0; grid.cell_count() * d];
    for k in 0..grid.cell_count() {
        let idx = grid.cell_index(k);
        for axis in 0..d {
            let xs = grid.axis(axis);
            let (xl, xr) = (xs[idx[axis]], xs[idx[axis] + 1]);
            let left = if idx[axis] == 0 {
                0.0
            } else {
                -h[side_index(grid, axis, k - strides[axis])]
            };
            let right = if idx[axis] + 1 == shape[axis] {
                0.0
            } else {
                -h[side_index(grid, axis, k)]
            };
            let c = (right - left) / (xr - xl);
            slopes[k * d + axis] = c;
            offsets[k * d + axis] = left;
        }
    }
    Ok(ParField {
        grid: grid.clone(),
        slopes,
        offsets,
    })
}

/// Weak divergence, constant on each cell: `sum_i c_i^k`.
pub fn par_divergence(field: &ParField) -> PcrFunction {
    let d = field.grid.dim();
    let values = field.slopes.chunks(d).map(|c| c.iter().sum()).collect();
    PcrFunction::new(field.grid.clone(), values).expect("one value per cell")
}
