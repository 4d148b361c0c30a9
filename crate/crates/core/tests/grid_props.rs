mod common;

use anisotv::graph::{total_variation, weighted_divergence, weighted_inner};
use anisotv::grid::{
    average, build_graph, build_partition, iota, iota_inv, kappa, kappa_inv, par_divergence,
    refine_grid, sample_subgradient, Grid, PcrFunction,
};
use anisotv::minimality::convex_catalog;
use anisotv::rof::{rof_objective, solve_rof, DEFAULT_MAX_ITER};
use common::{max_abs_diff, random_grid, random_shape, random_vec, rng};
use proptest::prelude::*;
use rand::Rng;

fn grid(max_cells: usize) -> impl Strategy<Value = (Grid, u64)> {
    any::<u64>().prop_map(move |seed| {
        let mut r = rng(seed);
        let shape = random_shape(&mut r, max_cells);
        (random_grid(&mut r, &shape), seed.wrapping_add(1))
    })
}

fn graph_of(g: &Grid) -> anisotv::WeightedGraph {
    build_graph(&build_partition(g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diagram_commutes((g, seed) in grid(200)) {
        let graph = graph_of(&g);
        let h = random_vec(&mut rng(seed), graph.edge_count(), -3.0, 3.0);
        let field = kappa_inv(&h, &g).unwrap();
        prop_assert!(max_abs_diff(&kappa(&field), &h) <= 1e-12 * 3.0);
        let lhs = iota(&par_divergence(&field));
        let rhs = weighted_divergence(&graph, &kappa(&field)).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn jensen_contraction((g, seed) in grid(60), k in 2usize..4) {
        let fine = refine_grid(&g, k).unwrap();
        let u = PcrFunction::new(fine.clone(), random_vec(&mut rng(seed), fine.cell_count(), -2.0, 2.0)).unwrap();
        let a = average(&g, &u).unwrap();
        for p in convex_catalog() {
            let lhs = a.integrate(|t| p.eval(t));
            let rhs = u.integrate(|t| p.eval(t));
            prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0), "{}: {lhs} > {rhs}", p.name());
        }
    }

    #[test]
    fn averaged_subgradient_stays_a_subgradient((g, seed) in grid(60), k in 2usize..4, alpha in 0.01f64..2.0) {
        let fine = refine_grid(&g, k).unwrap();
        let sub = average(&g, &sample_subgradient(&fine, alpha, seed)).unwrap();
        let graph = graph_of(&g);
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..50 {
            let v = random_vec(&mut r, graph.vertex_count(), -1.0, 1.0);
            let j = alpha * total_variation(&graph, &v).unwrap();
            let pair = weighted_inner(&graph, sub.values(), &v).unwrap();
            prop_assert!(j - pair >= -1e-10 * j.max(1.0), "{j} < {pair}");
        }
    }

    #[test]
    fn rof_equivalence((g, seed) in grid(100), alpha in 0.01f64..1.0) {
        let graph = graph_of(&g);
        let part = build_partition(&g);
        let f = PcrFunction::new(g.clone(), random_vec(&mut rng(seed), g.cell_count(), -1.0, 1.0)).unwrap();
        let sol = solve_rof(&graph, f.values(), alpha, 1e-9, DEFAULT_MAX_ITER).unwrap();
        let u = iota_inv(&sol.u, &g).unwrap();
        let diff = PcrFunction::new(g.clone(), u.values().iter().zip(f.values()).map(|(a, b)| a - b).collect()).unwrap();
        let tv: f64 = part.sides().iter().map(|s| s.measure * (u.values()[s.upper] - u.values()[s.lower]).abs()).sum();
        let pcr = 0.5 * diff.integrate(|t| t * t) + alpha * tv;
        let gr = rof_objective(&graph, &iota(&f), alpha, &iota(&u));
        prop_assert!((pcr - gr).abs() <= 1e-12 * gr.abs().max(1e-300), "{pcr} vs {gr}");
    }
}

#[test]
fn pcr_datum_is_preserved_by_refinement() {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let shape = random_shape(&mut r, 64);
        let g = random_grid(&mut r, &shape);
        let f = PcrFunction::new(g.clone(), random_vec(&mut r, g.cell_count(), -1.0, 1.0)).unwrap();
        let alpha = r.gen_range(0.01..0.5);
        let tol = 1e-9;
        let coarse = solve_rof(&graph_of(&g), f.values(), alpha, tol, DEFAULT_MAX_ITER).unwrap();
        for k in [2, 4] {
            let fine = refine_grid(&g, k).unwrap();
            let ff = f.on_refinement(&fine).unwrap();
            let sol =
                solve_rof(&graph_of(&fine), ff.values(), alpha, tol, DEFAULT_MAX_ITER).unwrap();
            let back = average(&g, &iota_inv(&sol.u, &fine).unwrap()).unwrap();
            worst = worst.max(max_abs_diff(back.values(), &coarse.u));
        }
    }
    assert!(worst <= 1e-8, "worst deviation {worst:e}");
}

#[test]
fn averaging_is_a_projection() {
    let mut r = rng(3);
    let g = random_grid(&mut r, &[3, 4]);
    let f = PcrFunction::new(g.clone(), random_vec(&mut r, 12, -1.0, 1.0)).unwrap();
    assert_eq!(average(&g, &f).unwrap(), f);
    let fine = refine_grid(&g, 2).unwrap();
    let back = average(&g, &f.on_refinement(&fine).unwrap()).unwrap();
    assert!(max_abs_diff(back.values(), f.values()) < 1e-15);
}
