//! Exact ROF on path graphs via the taut string.
//!
//! Writing `U_k = sum_{i<=k} w_i u_i` and `F_k` likewise for the datum, the
//! dual constraint `|H| <= alpha` on edge `k` becomes
//! `|U_k - F_k| <= alpha W_k`: the cumulative primal must stay in a tube
//! around the cumulative datum, pinned at both ends. The minimiser is the
//! taut string through that tube with abscissae `X_k = sum_{i<=k} w_i`, and
//! `u` is its slope.

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Minimiser of `1/2 sum w_i (f_i - u_i)^2 + alpha sum W_i |u_{i+1} - u_i|`
/// on the chain `0 - 1 - ... - n-1`, where `W_i` couples vertices `i` and
/// `i + 1`.
pub fn solve_chain_exact(
    f: &[f64],
    vertex_weights: &[f64],
    edge_weights: &[f64],
    alpha: f64,
) -> Result<Vec<f64>> {
    let n = f.len();
    if vertex_weights.len() != n {
        return Err(Error::Topology(format!(
            "{} vertex weights for {n} vertices",
            vertex_weights.len()
        )));
    }
    if edge_weights.len() + 1 != n.max(1) {
        return Err(Error::Topology(format!(
            "a chain of {n} vertices needs {} edge weights, got {}",
            n.saturating_sub(1),
            edge_weights.len()
        )));
    }
    if vertex_weights
        .iter()
        .chain(edge_weights)
        .any(|w| !(w.is_finite() && *w > 0.0))
    {
        return Err(Error::Graph("chain weights must be positive".into()));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::Config(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    if alpha == 0.0 || n <= 1 {
        return Ok(f.to_vec());
    }

    let mut x = vec![0.0; n + 1];
    let mut lo = vec![0.0; n + 1];
    let mut hi = vec![0.0; n + 1];
    let mut cum = 0.0;
    for k in 1..=n {
        x[k] = x[k - 1] + vertex_weights[k - 1];
        cum += vertex_weights[k - 1] * f[k - 1];
        let half = if k < n {
            alpha * edge_weights[k - 1]
        } else {
            0.0
        };
        lo[k] = cum - half;
        hi[k] = cum + half;
    }

    let mut u = vec![0.0; n];
    let (mut anchor, mut y0) = (0usize, 0.0);
    while anchor < n {
        let mut s_lo = f64::NEG_INFINITY;
        let mut s_hi = f64::INFINITY;
        let (mut j_lo, mut j_hi) = (anchor, anchor);
        let mut k = anchor + 1;
        // (knot index, slope, ordinate at that knot)
        let bend = loop {
            let dx = x[k] - x[anchor];
            let below = (lo[k] - y0) / dx;
            let above = (hi[k] - y0) / dx;
            if k == n {
                if below > s_hi {
                    break (j_hi, s_hi, hi[j_hi]);
                } else if above < s_lo {
                    break (j_lo, s_lo, lo[j_lo]);
                }
                break (n, below, lo[n]);
            }
            if below > s_hi {
                break (j_hi, s_hi, hi[j_hi]);
            }
            if above < s_lo {
                break (j_lo, s_lo, lo[j_lo]);
            }
            if below > s_lo {
                s_lo = below;
                j_lo = k;
            }
            if above < s_hi {
                s_hi = above;
                j_hi = k;
            }
            k += 1;
        };
        let (knot, slope, y) = bend;
        u[anchor..knot].iter_mut().for_each(|v| *v = slope);
        anchor = knot;
        y0 = y;
    }
    Ok(u)
}

/// Runs [`solve_chain_exact`] on a graph that must be a simple path (edge
/// orientations are irrelevant).
pub fn solve_chain_graph(g: &WeightedGraph, f: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let n = g.vertex_count();
    crate::error::check_len("datum", n, f.len())?;
    if n <= 1 {
        return solve_chain_exact(f, g.vertex_weights(), &[], alpha);
    }
    if g.edge_count() != n - 1 {
        return Err(Error::Topology(format!(
            "{} edges on {n} vertices",
            g.edge_count()
        )));
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        adj[i].push((j, e));
        adj[j].push((i, e));
    }
    if let Some(v) = adj.iter().position(|a| a.len() > 2) {
        return Err(Error::Topology(format!(
            "vertex {v} has degree {}",
            adj[v].len()
        )));
    }
    let start = adj
        .iter()
        .position(|a| a.len() == 1)
        .ok_or_else(|| Error::Topology("no endpoint of degree one".into()))?;

    let mut order = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n - 1);
    let (mut prev, mut cur) = (usize::MAX, start);
    loop {
        order.push(cur);
        match adj[cur].iter().find(|&&(v, _)| v != prev) {
            Some(&(next, e)) if order.len() < n => {
                weights.push(g.edge_weights()[e]);
                prev = cur;
                cur = next;
            }
            _ => break,
        }
    }
    if order.len() != n {
        return Err(Error::Topology("graph is not connected".into()));
    }

    let fp: Vec<f64> = order.iter().map(|&v| f[v]).collect();
    let wp: Vec<f64> = order.iter().map(|&v| g.vertex_weights()[v]).collect();
    let up = solve_chain_exact(&fp, &wp, &weights, alpha)?;
    let mut u = vec![0.0; n];
    for (&v, val) in order.iter().zip(up) {
        u[v] = val;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertex_example() {
        let u = solve_chain_exact(&[0.0, 2.0], &[1.0, 1.0], &[1.0], 0.5).unwrap();
        assert!(
            (u[0] - 0.5).abs() < 1e-15 && (u[1] - 1.5).abs() < 1e-15,
            "{u:?}"
        );
        let u = solve_chain_exact(&[0.0, 2.0], &[1.0, 1.0], &[1.0], 2.0).unwrap();
        assert_eq!(u, vec![1.0, 1.0]);
    }

    #[test]
    fn constant_and_zero_alpha() {
        let u = solve_chain_exact(&[1.0; 3], &[1.0; 3], &[1.0; 2], 5.0).unwrap();
        assert_eq!(u, vec![1.0; 3]);
        let f = [0.3, -2.0, 7.0];
        assert_eq!(solve_chain_exact(&f, &[1.0; 3], &[1.0; 2], 0.0).unwrap(), f);
    }

    #[test]
    fn weighted_mean_when_heavily_regularised() {
        let f = [1.0, 5.0, -2.0];
        let w = [0.5, 2.0, 1.0];
        let u = solve_chain_exact(&f, &w, &[1.0, 1.0], 1e3).unwrap();
        let mean = (0.5 + 10.0 - 2.0) / 3.5;
        assert!(u.iter().all(|v| (v - mean).abs() < 1e-12), "{u:?}");
    }

    #[test]
    fn topology_errors() {
        assert!(matches!(
            solve_chain_exact(&[1.0, 2.0], &[1.0, 1.0], &[1.0, 1.0], 1.0),
            Err(Error::Topology(_))
        ));
        let star =
            WeightedGraph::new(vec![1.0; 4], vec![(0, 1), (0, 2), (0, 3)], vec![1.0; 3]).unwrap();
        assert!(matches!(
            solve_chain_graph(&star, &[0.0; 4], 1.0),
            Err(Error::Topology(_))
        ));
        let cycle =
            WeightedGraph::new(vec![1.0; 3], vec![(0, 1), (1, 2), (2, 0)], vec![1.0; 3]).unwrap();
        assert!(solve_chain_graph(&cycle, &[0.0; 3], 1.0).is_err());
    }

    #[test]
    fn graph_path_in_scrambled_order() {
        // path 2 - 0 - 3 - 1 with mixed orientations
        let g = WeightedGraph::new(
            vec![1.0, 2.0, 0.5, 1.5],
            vec![(0, 2), (3, 0), (3, 1)],
            vec![1.0, 0.3, 2.0],
        )
        .unwrap();
        let f = [0.2, -1.0, 3.0, 0.7];
        let u = solve_chain_graph(&g, &f, 0.4).unwrap();
        // walked from the lowest-numbered endpoint: 1, 3, 0, 2
        let direct = solve_chain_exact(
            &[-1.0, 0.7, 0.2, 3.0],
            &[2.0, 1.5, 1.0, 0.5],
            &[2.0, 0.3, 1.0],
            0.4,
        )
        .unwrap();
        assert_eq!(u, vec![direct[2], direct[0], direct[3], direct[1]]);
    }
}
