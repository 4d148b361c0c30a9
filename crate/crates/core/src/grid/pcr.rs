use super::{build_graph, build_partition, Grid};
use crate::error::{check_len, Result};
use crate::graph::WeightedGraph;

/// Piecewise constant function on the cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PcrFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl PcrFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len("cell values", grid.cell_count(), values.len())?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let n = grid.cell_count();
        Self {
            grid,
            values: vec![value; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `int_Omega phi(g) dx`, exact for piecewise constant `g`.
    pub fn integrate(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .cell_volumes()
            .iter()
            .zip(&self.values)
            .map(|(vol, v)| vol * phi(*v))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate(|t| t * t).sqrt()
    }

    /// The same function written on a refinement of its grid.
    pub fn on_refinement(&self, fine: &Grid) -> Result<PcrFunction> {
        let maps = self.grid.refinement_map(fine)?;
        let coarse_strides = self.grid.strides();
        let values = (0..fine.cell_count())
            .map(|k| {
                let idx = fine.cell_index(k);
                let c: usize = idx
                    .iter()
                    .zip(&maps)
                    .zip(&coarse_strides)
                    .map(|((&j, map), s)| map[j] * s)
                    .sum();
                self.values[c]
            })
            .collect();
        PcrFunction::new(fine.clone(), values)
    }
}

/// Averaging operator `A_G`: each cell of `grid` receives the volume mean
/// of the cells of `g` it contains. `g` must live on a refinement of `grid`.
pub fn average(grid: &Grid, g: &PcrFunction) -> Result<PcrFunction> {
    if grid == g.grid() {
        return Ok(g.clone());
    }
    let maps = grid.refinement_map(g.grid())?;
    let strides = grid.strides();
    let mut mass = vec![0.0; grid.cell_count()];
    let mut vol = vec![0.0; grid.cell_count()];
    let fine_vols = g.grid().cell_volumes();
    for (k, (&v, &fv)) in g.values().iter().zip(&fine_vols).enumerate() {
        let idx = g.grid().cell_index(k);
        let c: usize = idx
            .iter()
            .zip(&maps)
            .zip(&strides)
            .map(|((&j, map), s)| map[j] * s)
            .sum();
        mass[c] += fv * v;
        vol[c] += fv;
    }
    let values = mass.iter().zip(&vol).map(|(m, v)| m / v).collect();
    PcrFunction::new(grid.clone(), values)
}

/// Cell values as a vertex function of the grid's graph.
pub fn iota(f: &PcrFunction) -> Vec<f64> {
    f.values.clone()
}

pub fn iota_inv(u: &[f64], grid: &Grid) -> Result<PcrFunction> {
    PcrFunction::new(grid.clone(), u.to_vec())
}

/// Random subgradient of the scaled total variation at zero: draws `H`
/// uniformly from `[-alpha, alpha]` on every side and returns the divergence
/// of the corresponding piecewise affine field as a cell function.
pub fn sample_subgradient(grid: &Grid, alpha: f64, seed: u64) -> PcrFunction {
    let graph = build_graph(&build_partition(grid));
    let h = crate::sampling::box_point(seed, 0, graph.edge_count(), alpha);
    subgradient_from_box(grid, &graph, &h)
}

pub(crate) fn subgradient_from_box(grid: &Grid, graph: &WeightedGraph, h: &[f64]) -> PcrFunction {
    let mut div = vec![0.0; graph.vertex_count()];
    graph.divergence_into(h, &mut div);
    PcrFunction {
        grid: grid.clone(),
        values: div,
    }
}
