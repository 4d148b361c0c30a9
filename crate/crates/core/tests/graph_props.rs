mod common;

use anisotv::graph::{
    pairing, total_variation, tv_argmax_edges, unit_divergence, weighted_divergence, weighted_inner,
};
use anisotv::WeightedGraph;
use approx::assert_relative_eq;
use common::{random_graph, random_vec, rng};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (WeightedGraph, Vec<f64>, Vec<f64>)> {
    (1usize..40, 0usize..60, any::<u64>()).prop_map(|(n, extra, seed)| {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, extra);
        let u = random_vec(&mut r, n, -5.0, 5.0);
        let h = random_vec(&mut r, g.edge_count(), -1.0, 1.0);
        (g, u, h)
    })
}

proptest! {
    #[test]
    fn pairing_identity((g, u, h) in instance()) {
        let div = weighted_divergence(&g, &h).unwrap();
        let lhs = weighted_inner(&g, &u, &div).unwrap();
        let rhs = pairing(&g, &u, &h).unwrap();
        let scale: f64 = g
            .edges()
            .iter()
            .zip(g.edge_weights())
            .map(|(&(i, j), w)| w * (u[j] - u[i]).abs())
            .sum::<f64>()
            .max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn support_bound((g, u, h) in instance()) {
        let tv = total_variation(&g, &u).unwrap();
        prop_assert!(pairing(&g, &u, &h).unwrap() <= tv * (1.0 + 1e-12) + 1e-12);
        let best = tv_argmax_edges(&g, &u).unwrap();
        prop_assert!(best.iter().all(|x| x.abs() <= 1.0));
        assert_relative_eq!(pairing(&g, &u, &best).unwrap(), tv, max_relative = 1e-12, epsilon = 1e-12);
    }

    #[test]
    fn orientation_invariance((g, u, h) in instance(), pick in any::<prop::sample::Index>()) {
        prop_assume!(g.edge_count() > 0);
        let e = pick.index(g.edge_count());
        let flipped = g.with_flipped_edge(e);
        let mut h2 = h.clone();
        h2[e] = -h2[e];
        let a = weighted_divergence(&g, &h).unwrap();
        let b = weighted_divergence(&flipped, &h2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
        prop_assert_eq!(total_variation(&g, &u).unwrap(), total_variation(&flipped, &u).unwrap());
    }

    #[test]
    fn tv_ignores_vertex_weights((g, u, _h) in instance(), seed in any::<u64>()) {
        let w = random_vec(&mut rng(seed), g.vertex_count(), 0.1, 10.0);
        let g2 = g.with_vertex_weights(w).unwrap();
        prop_assert_eq!(total_variation(&g, &u).unwrap(), total_variation(&g2, &u).unwrap());
    }

    #[test]
    fn unit_divergence_is_weighted_times_w((g, _u, h) in instance()) {
        let d = weighted_divergence(&g, &h).unwrap();
        let d1 = unit_divergence(&g, &h).unwrap();
        for ((a, b), w) in d.iter().zip(&d1).zip(g.vertex_weights()) {
            prop_assert!((a * w - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn hand_examples() {
    let g = WeightedGraph::new(vec![1.0; 2], vec![(0, 1)], vec![1.0]).unwrap();
    assert_eq!(weighted_divergence(&g, &[1.0]).unwrap(), vec![-1.0, 1.0]);
    assert_eq!(tv_argmax_edges(&g, &[1.0, 1.0]).unwrap(), vec![0.0]);
    let chain = WeightedGraph::chain(vec![1.0; 3], vec![1.0; 2]).unwrap();
    assert_eq!(
        weighted_divergence(&chain, &[1.0, 1.0]).unwrap(),
        vec![-1.0, 0.0, 1.0]
    );
    assert!(WeightedGraph::new(vec![1.0; 2], vec![(0, 1), (1, 0)], vec![1.0; 2]).is_err());
    assert!(WeightedGraph::new(vec![1.0; 2], vec![(0, 0)], vec![1.0]).is_err());
    assert!(WeightedGraph::new(vec![0.0, 1.0], vec![(0, 1)], vec![1.0]).is_err());
}
