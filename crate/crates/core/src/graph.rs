//! Oriented weighted graphs and their discrete calculus.
//!
//! A vertex carries a volume `w(v) > 0` and an edge carries an area
//! `W(e) > 0`. Vertex functions and edge functions are plain `f64` slices
//! indexed by vertex and edge number respectively.
//!
//! All reductions walk the edge list in ascending index order, so results
//! are bit-reproducible for identical inputs.

use std::collections::HashSet;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    edge_weights: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph, rejecting self-loops, repeated or anti-parallel
    /// edges, and non-positive weights.
    pub fn new(
        vertex_weights: Vec<f64>,
        edges: Vec<(usize, usize)>,
        edge_weights: Vec<f64>,
    ) -> Result<Self> {
        check_len("edge weights", edges.len(), edge_weights.len())?;
        let n = vertex_weights.len();
        if let Some(v) = vertex_weights
            .iter()
            .position(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::Graph(format!(
                "vertex {v} has non-positive weight {}",
                vertex_weights[v]
            )));
        }
        if let Some(e) = edge_weights
            .iter()
            .position(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::Graph(format!(
                "edge {e} has non-positive weight {}",
                edge_weights[e]
            )));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::Graph(format!(
                    "edge {k} = ({i}, {j}) references a vertex outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::Graph(format!(
                    "edge {k} is a self-loop at vertex {i}"
                )));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::Graph(format!(
                    "edge {k} = ({i}, {j}) duplicates an existing edge or its reversal"
                )));
            }
        }
        Ok(Self {
            vertex_weights,
            edges,
            edge_weights,
        })
    }

    /// Path graph `0 -> 1 -> ... -> n-1`.
    pub fn chain(vertex_weights: Vec<f64>, edge_weights: Vec<f64>) -> Result<Self> {
        let n = vertex_weights.len();
        check_len(
            "chain edge weights",
            n.saturating_sub(1),
            edge_weights.len(),
        )?;
        let edges = (1..n).map(|j| (j - 1, j)).collect();
        Self::new(vertex_weights, edges, edge_weights)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Same topology and edge weights with new vertex weights.
    pub fn with_vertex_weights(&self, vertex_weights: Vec<f64>) -> Result<Self> {
        check_len("vertex weights", self.vertex_count(), vertex_weights.len())?;
        Self::new(
            vertex_weights,
            self.edges.clone(),
            self.edge_weights.clone(),
        )
    }

    /// Copy of the graph with edge `e` pointing the other way.
    pub fn with_flipped_edge(&self, e: usize) -> Self {
        let mut flipped = self.clone();
        let (i, j) = flipped.edges[e];
        flipped.edges[e] = (j, i);
        flipped
    }

    /// Connected component label per vertex, labels numbered by first
    /// appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j) in &self.edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = vec![0; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            out[v] = label[r];
        }
        out
    }

    /// Vertex degrees ignoring orientation.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count()];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// `div_{W,w}` without shape checks; `out` is overwritten.
    pub(crate) fn divergence_into(&self, h: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        self.flux_into(h, out);
        for (x, w) in out.iter_mut().zip(&self.vertex_weights) {
            *x /= w;
        }
    }

    /// Unweighted net inflow `w * div_{W,w} h`, accumulated into `out`.
    pub(crate) fn flux_into(&self, h: &[f64], out: &mut [f64]) {
        for ((&(i, j), &we), &he) in self.edges.iter().zip(&self.edge_weights).zip(h) {
            let flow = we * he;
            out[j] += flow;
            out[i] -= flow;
        }
    }

    /// `W(e) (u(j) - u(i))` for each edge, written into `out`.
    pub(crate) fn weighted_gradient_into(&self, u: &[f64], out: &mut [f64]) {
        for ((g, &(i, j)), &we) in out.iter_mut().zip(&self.edges).zip(&self.edge_weights) {
            *g = we * (u[j] - u[i]);
        }
    }

    pub(crate) fn tv_unchecked(&self, u: &[f64]) -> f64 {
        self.edges
            .iter()
            .zip(&self.edge_weights)
            .map(|(&(i, j), &we)| we * (u[i] - u[j]).abs())
            .sum()
    }
}

/// Weighted divergence `div_{W,w} H`: at each vertex, weighted inflow minus
/// weighted outflow, divided by the vertex weight.
pub fn weighted_divergence(g: &WeightedGraph, h: &[f64]) -> Result<Vec<f64>> {
    check_len("edge function", g.edge_count(), h.len())?;
    let mut out = vec![0.0; g.vertex_count()];
    g.divergence_into(h, &mut out);
    Ok(out)
}

/// Divergence with unit vertex weights, `div_{W,1} H`.
pub fn unit_divergence(g: &WeightedGraph, h: &[f64]) -> Result<Vec<f64>> {
    check_len("edge function", g.edge_count(), h.len())?;
    let mut out = vec![0.0; g.vertex_count()];
    g.flux_into(h, &mut out);
    Ok(out)
}

/// Weighted total variation `sum_e W(e) |u(i) - u(j)|`. Vertex weights and
/// edge orientation play no role.
pub fn total_variation(g: &WeightedGraph, u: &[f64]) -> Result<f64> {
    check_len("vertex function", g.vertex_count(), u.len())?;
    Ok(g.tv_unchecked(u))
}

/// Edge function in the unit box attaining the total variation of `u`.
/// Edges where `u` is flat get 0.
pub fn tv_argmax_edges(g: &WeightedGraph, u: &[f64]) -> Result<Vec<f64>> {
    check_len("vertex function", g.vertex_count(), u.len())?;
    Ok(g.edges()
        .iter()
        .map(|&(i, j)| {
            if u[j] > u[i] {
                1.0
            } else if u[j] < u[i] {
                -1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// Edge-side pairing `sum_e W(e) (u(j) - u(i)) H(e)`, which equals the
/// vertex-side pairing `<u, div_{W,w} H>_w`.
pub fn pairing(g: &WeightedGraph, u: &[f64], h: &[f64]) -> Result<f64> {
    check_len("vertex function", g.vertex_count(), u.len())?;
    check_len("edge function", g.edge_count(), h.len())?;
    Ok(g.edges()
        .iter()
        .zip(g.edge_weights())
        .zip(h)
        .map(|((&(i, j), &we), &he)| we * (u[j] - u[i]) * he)
        .sum())
}

/// `sum_v w(v) u(v) v(v)`.
pub fn weighted_inner(g: &WeightedGraph, u: &[f64], v: &[f64]) -> Result<f64> {
    check_len("vertex function", g.vertex_count(), u.len())?;
    check_len("vertex function", g.vertex_count(), v.len())?;
    Ok(weighted_dot(g.vertex_weights(), u, v))
}

pub(crate) fn weighted_dot(w: &[f64], u: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(u).zip(v).map(|((w, a), b)| w * a * b).sum()
}

/// Weighted `p`-norm; `p = f64::INFINITY` gives the max-norm, which ignores
/// the weights.
pub fn weighted_norm(w: &[f64], u: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    }
    let s: f64 = w.iter().zip(u).map(|(w, x)| w * x.abs().powf(p)).sum();
    s.powf(1.0 / p)
}
