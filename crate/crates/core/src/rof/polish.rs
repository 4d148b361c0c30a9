//! Exact reconstruction of a primal-dual pair from an identified active set.

use crate::graph::WeightedGraph;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Edges with `|h| >= (1 - snap) alpha` are pinned to `±alpha` and the
/// others merge their endpoints into clusters on which `u` is constant. The
/// cluster values follow from mass balance and the free edges are re-solved
/// on a spanning forest so that `u = f - div h` holds exactly. Returns
/// `None` when the rebuilt field leaves the box, which means the active set
/// was wrong.
pub(super) fn polish(
    g: &WeightedGraph,
    f: &[f64],
    alpha: f64,
    h: &[f64],
    snap: f64,
) -> Option<Vec<f64>> {
    let n = g.vertex_count();
    let w = g.vertex_weights();
    let edges = g.edges();
    let ew = g.edge_weights();
    let free: Vec<bool> = h.iter().map(|x| x.abs() < (1.0 - snap) * alpha).collect();
    let h: Vec<f64> = h
        .iter()
        .zip(&free)
        .map(|(&x, &free)| if free { x } else { alpha.copysign(x) })
        .collect();

    let mut parent: Vec<usize> = (0..n).collect();
    let mut tree = vec![false; edges.len()];
    for (e, &(i, j)) in edges.iter().enumerate() {
        if !free[e] {
            continue;
        }
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
            tree[e] = true;
        }
    }

    // flux of fixed edges into each vertex, then cluster means
    let mut out = h.clone();
    let mut fixed = vec![0.0; n];
    for (e, (&(i, j), &we)) in edges.iter().zip(ew).enumerate() {
        if !tree[e] {
            fixed[j] += we * h[e];
            fixed[i] -= we * h[e];
        }
    }
    let mut mass = vec![0.0; n];
    let mut vol = vec![0.0; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        mass[r] += w[v] * f[v] - fixed[v];
        vol[r] += w[v];
    }
    let mut need: Vec<f64> = (0..n)
        .map(|v| {
            let r = find(&mut parent, v);
            w[v] * (f[v] - mass[r] / vol[r]) - fixed[v]
        })
        .collect();

    // peel the forest from the leaves
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(i, j)) in edges.iter().enumerate() {
        if tree[e] {
            adj[i].push(e);
            adj[j].push(e);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut up = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root);
        let mut k = start;
        while k < order.len() {
            let v = order[k];
            k += 1;
            for &e in &adj[v] {
                let (i, j) = edges[e];
                let x = if i == v { j } else { i };
                if !seen[x] {
                    seen[x] = true;
                    up[x] = e;
                    order.push(x);
                }
            }
        }
    }
    for &v in order.iter().rev() {
        let e = up[v];
        if e == usize::MAX {
            continue;
        }
        let (i, j) = edges[e];
        let flow = need[v];
        if v == j {
            out[e] = flow / ew[e];
            need[i] += flow;
        } else {
            out[e] = -flow / ew[e];
            need[j] += flow;
        }
    }

    let slack = 1e-12 * alpha;
    if out.iter().any(|x| !(x.abs() <= alpha + slack)) {
        return None;
    }
    out.iter_mut().for_each(|x| *x = x.clamp(-alpha, alpha));
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_two_vertex_solution() {
        let g = WeightedGraph::new(vec![1.0; 2], vec![(0, 1)], vec![1.0]).unwrap();
        // saturated edge: u = f - div h with h = alpha
        assert_eq!(
            polish(&g, &[0.0, 2.0], 0.5, &[0.5], 0.0).unwrap(),
            vec![0.5]
        );
        // free edge: the pair merges into its mean, h = -(f0 - mean)
        assert_eq!(
            polish(&g, &[0.0, 2.0], 2.0, &[0.9], 0.0).unwrap(),
            vec![1.0]
        );
        // wrong active set: merging needs |h| = 1 > 0.5
        assert!(polish(&g, &[0.0, 2.0], 0.5, &[0.2], 0.0).is_none());
        // a nearly clamped edge is pinned once the snap covers it
        assert_eq!(
            polish(&g, &[0.0, 2.0], 0.5, &[0.4999], 1e-3).unwrap(),
            vec![0.5]
        );
    }
}
