mod common;

use anisotv::graph::{weighted_divergence, weighted_norm};
use anisotv::rof::{
    duality_gap, rof_objective, solve_chain_exact, solve_chain_graph, solve_rof, verify_optimality,
    DEFAULT_MAX_ITER,
};
use anisotv::{Error, WeightedGraph};
use common::{max_abs_diff, random_graph, random_vec, range, rng};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-9;

fn instance(max_n: usize) -> impl Strategy<Value = (WeightedGraph, Vec<f64>, f64)> {
    (2usize..max_n, 0usize..40, any::<u64>(), 0usize..3).prop_map(|(n, extra, seed, a)| {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, extra);
        let f = random_vec(&mut r, n, -1.0, 1.0);
        (g, f, [0.01, 0.1, 1.0][a])
    })
}

/// Disjoint union of two graphs.
fn union(a: &WeightedGraph, b: &WeightedGraph) -> WeightedGraph {
    let off = a.vertex_count();
    let mut w = a.vertex_weights().to_vec();
    w.extend_from_slice(b.vertex_weights());
    let mut edges = a.edges().to_vec();
    edges.extend(b.edges().iter().map(|&(i, j)| (i + off, j + off)));
    let mut ew = a.edge_weights().to_vec();
    ew.extend_from_slice(b.edge_weights());
    WeightedGraph::new(w, edges, ew).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn certificate_is_consistent((g, f, alpha) in instance(60)) {
        let sol = solve_rof(&g, &f, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(sol.relative_gap <= TOL);
        let gap = duality_gap(&g, &f, alpha, &sol.u, &sol.h).unwrap();
        prop_assert!((gap - sol.gap).abs() <= 1e-12 * (1.0 + gap.abs()));
        let report = verify_optimality(&g, &f, alpha, &sol.u, &sol.h, 10.0 * TOL).unwrap();
        prop_assert!(report.is_optimal(), "{:?}", report.failures);
    }

    #[test]
    fn minimal_norm((g, f, alpha) in instance(40), seed in any::<u64>()) {
        let sol = solve_rof(&g, &f, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
        let w = g.vertex_weights();
        let norm = weighted_norm(w, &sol.u, 2.0);
        let slack = (2.0 * sol.gap).sqrt() + TOL;
        let mut r = rng(seed);
        for _ in 0..100 {
            let h = random_vec(&mut r, g.edge_count(), -alpha, alpha);
            let div = weighted_divergence(&g, &h).unwrap();
            let c: Vec<f64> = f.iter().zip(&div).map(|(f, d)| f - d).collect();
            prop_assert!(norm <= weighted_norm(w, &c, 2.0) + slack);
        }
    }

    #[test]
    fn scaling_equivariance((g, f, alpha) in instance(40), c in 0.1f64..10.0) {
        let base = solve_rof(&g, &f, alpha, 1e-12, DEFAULT_MAX_ITER).unwrap();
        let cf: Vec<f64> = f.iter().map(|x| c * x).collect();
        let scaled = solve_rof(&g, &cf, c * alpha, 1e-12, DEFAULT_MAX_ITER).unwrap();
        let expect: Vec<f64> = base.u.iter().map(|x| c * x).collect();
        prop_assert!(max_abs_diff(&scaled.u, &expect) <= 1e-6 * c * range(&f).max(1e-3));
    }

    #[test]
    fn mean_preserved_per_component((a, fa, alpha) in instance(30), (b, fb, _) in instance(30)) {
        let g = union(&a, &b);
        let mut f = fa;
        f.extend(fb);
        let sol = solve_rof(&g, &f, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
        let labels = g.components();
        let k = labels.iter().max().unwrap() + 1;
        prop_assert_eq!(k, 2);
        for c in 0..k {
            let (mut su, mut sf, mut mass) = (0.0, 0.0, 0.0);
            for v in (0..f.len()).filter(|&v| labels[v] == c) {
                let w = g.vertex_weights()[v];
                su += w * sol.u[v];
                sf += w * f[v];
                mass += w * f[v].abs();
            }
            prop_assert!((su - sf).abs() <= 1e-10 * mass.max(1.0), "{su} vs {sf}");
        }
    }

    #[test]
    fn chain_oracle(n in 1usize..300, seed in any::<u64>()) {
        let mut r = rng(seed);
        let w = random_vec(&mut r, n, 0.1, 10.0);
        let ew = random_vec(&mut r, n.saturating_sub(1), 0.1, 10.0);
        let f = random_vec(&mut r, n, -1.0, 1.0);
        let alpha = r.gen_range(0.001..2.0);
        let exact = solve_chain_exact(&f, &w, &ew, alpha).unwrap();
        let g = WeightedGraph::chain(w, ew).unwrap();
        let sol = solve_rof(&g, &f, alpha, TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(max_abs_diff(&sol.u, &exact) <= 1e-6 * range(&f).max(f64::MIN_POSITIVE));
        // the exact solution is at least as good as the iterative one
        prop_assert!(
            rof_objective(&g, &f, alpha, &exact) <= rof_objective(&g, &f, alpha, &sol.u) + 1e-12
        );
    }
}

#[test]
fn hand_examples() {
    let g = WeightedGraph::new(vec![1.0; 2], vec![(0, 1)], vec![1.0]).unwrap();
    let sol = solve_rof(&g, &[0.0, 2.0], 0.5, TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(max_abs_diff(&sol.u, &[0.5, 1.5]) < 1e-9);
    let sol = solve_rof(&g, &[0.0, 2.0], 2.0, TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(max_abs_diff(&sol.u, &[1.0, 1.0]) < 1e-9);
    let sol = solve_rof(&g, &[0.3, -2.0], 0.0, TOL, DEFAULT_MAX_ITER).unwrap();
    assert_eq!(sol.u, vec![0.3, -2.0]);
    assert_eq!(
        solve_chain_graph(&g, &[0.0, 2.0], 0.5).unwrap(),
        vec![0.5, 1.5]
    );
}

#[test]
fn chain_oracle_rejects_non_chains() {
    let tri = WeightedGraph::new(vec![1.0; 3], vec![(0, 1), (1, 2), (2, 0)], vec![1.0; 3]).unwrap();
    let err = solve_chain_graph(&tri, &[0.0; 3], 1.0).unwrap_err();
    assert!(matches!(err, Error::Topology(_)), "{err}");
}

#[test]
fn non_convergence_carries_best_iterate() {
    let mut r = rng(5);
    let g = random_graph(&mut r, 200, 400);
    let f = random_vec(&mut r, 200, -1.0, 1.0);
    match solve_rof(&g, &f, 1.0, 1e-15, 3) {
        Err(Error::NonConvergence {
            iterations, best, ..
        }) => {
            assert_eq!(iterations, 3);
            assert_eq!(best.u.len(), 200);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}
