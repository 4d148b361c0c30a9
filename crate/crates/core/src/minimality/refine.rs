use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{
    average, build_graph, build_partition, coarsen_grid, iota, refine_grid, Grid, PcrFunction,
};
use crate::rof::solve_rof;

/// Solution on one level `G_m` of the study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub m: usize,
    pub cells: usize,
    pub diameter: f64,
    /// `||u_{alpha,m}||_{L^2}` for the datum averaged onto `G_m`.
    pub solution_norm: f64,
    /// `||A_{G_m} u_alpha||_{L^2}`.
    pub averaged_norm: f64,
}

/// Re-solve of the datum on a refinement of its own grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestedCheck {
    pub factor: usize,
    /// Max cell deviation from `u_alpha` after averaging back.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub alpha: f64,
    pub tol: f64,
    pub reference_norm: f64,
    pub levels: Vec<RefinementLevel>,
    pub nested: Vec<NestedCheck>,
    /// `solution_norm <= averaged_norm <= reference_norm` on every level,
    /// and `solution_norm` nondecreasing in `m`, all up to `slack`.
    pub chain_holds: bool,
    pub slack: f64,
}

fn solve_on(f: &PcrFunction, alpha: f64, tol: f64, max_iter: usize) -> Result<PcrFunction> {
    let graph = build_graph(&build_partition(f.grid()));
    let sol = solve_rof(&graph, &iota(f), alpha, tol, max_iter)?;
    PcrFunction::new(f.grid().clone(), sol.u)
}

/// Compares the minimiser `u_alpha` for the datum `f` with minimisers on a
/// nested family of coarser grids and on refinements of `f`'s grid.
///
/// With `M = max(levels)`, level `m` is the grid keeping every `M / m`-th
/// breakpoint of `f`'s grid, so level `M` is the datum grid itself. The
/// datum on level `m` is `A_{G_m} f`.
pub fn refinement_study(
    f: &PcrFunction,
    alpha: f64,
    tol: f64,
    max_iter: usize,
    levels: &[usize],
    nested: &[usize],
    slack: f64,
) -> Result<RefinementStudy> {
    let top = levels.iter().copied().max().unwrap_or(1);
    if let Some(&m) = levels.iter().find(|&&m| m == 0 || top % m != 0) {
        return Err(Error::Config(format!("level {m} does not divide {top}")));
    }
    let reference = solve_on(f, alpha, tol, max_iter)?;
    let reference_norm = reference.l2_norm();

    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for m in sorted {
        let grid: Grid = coarsen_grid(f.grid(), top / m)?;
        let u_m = solve_on(&average(&grid, f)?, alpha, tol, max_iter)?;
        rows.push(RefinementLevel {
            m,
            cells: grid.cell_count(),
            diameter: grid.max_diagonal(),
            solution_norm: u_m.l2_norm(),
            averaged_norm: average(&grid, &reference)?.l2_norm(),
        });
    }

    let mut checks = Vec::with_capacity(nested.len());
    for &k in nested {
        let fine = f.on_refinement(&refine_grid(f.grid(), k)?)?;
        let back = average(f.grid(), &solve_on(&fine, alpha, tol, max_iter)?)?;
        let max_deviation = back
            .values()
            .iter()
            .zip(reference.values())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        checks.push(NestedCheck {
            factor: k,
            max_deviation,
        });
    }

    let chain_holds = rows.iter().all(|r| {
        r.solution_norm <= r.averaged_norm + slack && r.averaged_norm <= reference_norm + slack
    }) && rows
        .windows(2)
        .all(|p| p[0].solution_norm <= p[1].solution_norm + slack);
    Ok(RefinementStudy {
        alpha,
        tol,
        reference_norm,
        levels: rows,
        nested: checks,
        chain_holds,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rof::DEFAULT_MAX_ITER;

    #[test]
    fn norms_increase_towards_the_datum_grid() {
        let grid = Grid::uniform(&[(0.0, 1.0)], &[16]).unwrap();
        let values = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.5).collect();
        let f = PcrFunction::new(grid, values).unwrap();
        let s =
            refinement_study(&f, 0.05, 1e-12, DEFAULT_MAX_ITER, &[1, 2, 4, 8], &[2], 1e-8).unwrap();
        assert!(s.chain_holds, "{s:?}");
        let cells: Vec<usize> = s.levels.iter().map(|l| l.cells).collect();
        assert_eq!(cells, vec![2, 4, 8, 16]);
        assert!((s.levels[3].solution_norm - s.reference_norm).abs() < 1e-12);
        assert!(s.nested[0].max_deviation < 1e-8, "{s:?}");
    }

    #[test]
    fn bad_levels() {
        let f = PcrFunction::constant(Grid::uniform(&[(0.0, 1.0)], &[4]).unwrap(), 1.0);
        assert!(refinement_study(&f, 0.1, 1e-9, 10, &[3, 4], &[], 1e-8).is_err());
    }
}
