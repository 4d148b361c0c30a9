//! Convex sets that are best approximations for every convex integrand at
//! once, and the checks around them.
//!
//! Sets are either hulls of explicit vertex lists or images
//! `{div_{W,1} H : |H_e| <= alpha}` of the dual box under the unweighted
//! divergence. Membership and cone feasibility are decided by a small
//! phase-one simplex; projections use Wolfe's minimum-norm-point method or,
//! for divergence images, the ROF solver.

mod simplex;
mod wolfe;

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::graph::{unit_divergence, WeightedGraph};
use crate::minimality::{all_probes, run_audit, AuditReport, AuditSpec, Fixed};
use crate::rof::{solve_rof, DEFAULT_MAX_ITER};
use crate::sampling::stream;

use simplex::phase_one;

/// Box images with at most this many edges are enumerated exhaustively.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 16;
/// Box vertices drawn when the edge count exceeds the limit.
pub const SAMPLED_VERTICES: usize = 1 << 12;
/// Relative duality gap used when a projection is computed by the solver.
pub const PROJECTION_TOL: f64 = 1e-12;
const WOLFE_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone)]
enum Repr {
    Vertices(Vec<Vec<f64>>),
    DivergenceBox { graph: WeightedGraph, alpha: f64 },
}

/// A bounded closed convex subset of `R^n`.
#[derive(Debug, Clone)]
pub struct PolytopeOracle {
    dim: usize,
    repr: Repr,
}

impl PolytopeOracle {
    /// Convex hull of `vertices`.
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Representation("no vertices".into()))?;
        if dim == 0 {
            return Err(Error::Representation("vertices have no coordinates".into()));
        }
        if let Some(k) = vertices.iter().position(|v| v.len() != dim) {
            return Err(Error::Representation(format!(
                "vertex {k} has {} coordinates, expected {dim}",
                vertices[k].len()
            )));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Representation(
                "vertex coordinates must be finite".into(),
            ));
        }
        Ok(Self {
            dim,
            repr: Repr::Vertices(vertices),
        })
    }

    /// `{div_{W,1} H : H in [-alpha, alpha]^E}` for the edges of `graph`.
    pub fn divergence_box(graph: WeightedGraph, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::Representation(format!(
                "box radius {alpha} is not >= 0"
            )));
        }
        Ok(Self {
            dim: graph.vertex_count(),
            repr: Repr::DivergenceBox { graph, alpha },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points whose hull is the set, and whether the list is complete.
    /// Divergence images list the images of box vertices (deduplicated),
    /// sampled at random past [`EXHAUSTIVE_EDGE_LIMIT`] edges.
    pub fn extreme_candidates(&self, seed: u64) -> (Vec<Vec<f64>>, bool) {
        match &self.repr {
            Repr::Vertices(v) => (v.clone(), true),
            Repr::DivergenceBox { graph, alpha } => {
                let m = graph.edge_count();
                let exhaustive = m <= EXHAUSTIVE_EDGE_LIMIT;
                let signs: Vec<Vec<bool>> = if exhaustive {
                    (0..1usize << m)
                        .map(|mask| (0..m).map(|e| mask >> e & 1 == 1).collect())
                        .collect()
                } else {
                    let mut rng = stream(seed, 0);
                    (0..SAMPLED_VERTICES)
                        .map(|_| (0..m).map(|_| rng.gen_bool(0.5)).collect())
                        .collect()
                };
                let quantum = 1e-12 * alpha.max(1e-300) * graph.edge_weights().iter().sum::<f64>();
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                for s in signs {
                    let h: Vec<f64> = s.iter().map(|&p| if p { *alpha } else { -alpha }).collect();
                    let x = unit_divergence(graph, &h).expect("edge count matches");
                    let key: Vec<i64> = x.iter().map(|v| (v / quantum).round() as i64).collect();
                    if seen.insert(key) {
                        out.push(x);
                    }
                }
                (out, exhaustive)
            }
        }
    }

    /// Largest distance between two points of the set. Exact for vertex
    /// lists and for divergence images up to [`EXHAUSTIVE_EDGE_LIMIT`]
    /// edges, a sampled lower bound beyond.
    pub fn diameter(&self) -> f64 {
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        match &self.repr {
            Repr::Vertices(v) => {
                let mut d = 0.0_f64;
                for (i, a) in v.iter().enumerate() {
                    for b in &v[i + 1..] {
                        d = d.max(dist(a, b));
                    }
                }
                d
            }
            Repr::DivergenceBox { .. } => {
                // the set is symmetric, so the diameter is twice the
                // largest norm of a vertex image
                let zero = vec![0.0; self.dim];
                let (pts, _) = self.extreme_candidates(0);
                2.0 * pts.iter().map(|p| dist(p, &zero)).fold(0.0, f64::max)
            }
        }
    }

    /// Total infeasibility of the linear system describing `x in M`.
    pub fn membership_residual(&self, x: &[f64]) -> Result<f64> {
        check_len("point", self.dim, x.len())?;
        Ok(match &self.repr {
            Repr::Vertices(v) => {
                // sum_k l_k v_k = x, sum_k l_k = 1, l >= 0
                let mut a = vec![vec![0.0; v.len()]; self.dim + 1];
                for (k, p) in v.iter().enumerate() {
                    for i in 0..self.dim {
                        a[i][k] = p[i];
                    }
                    a[self.dim][k] = 1.0;
                }
                let mut b = x.to_vec();
                b.push(1.0);
                phase_one(&a, &b).0
            }
            Repr::DivergenceBox { graph, alpha } => {
                // H = p - alpha with p + q = 2 alpha, p, q >= 0
                let (n, m) = (self.dim, graph.edge_count());
                let mut a = vec![vec![0.0; 2 * m]; n + m];
                let mut b = vec![0.0; n + m];
                b[..n].copy_from_slice(x);
                for (e, (&(i, j), &w)) in graph.edges().iter().zip(graph.edge_weights()).enumerate()
                {
                    a[j][e] += w;
                    a[i][e] -= w;
                    b[j] += alpha * w;
                    b[i] -= alpha * w;
                    a[n + e][e] = 1.0;
                    a[n + e][m + e] = 1.0;
                    b[n + e] = 2.0 * alpha;
                }
                phase_one(&a, &b).0
            }
        })
    }

    fn member_tol(&self, diameter: f64) -> f64 {
        1e-12 * diameter.max(1.0)
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        let d = self.diameter();
        Ok(self.membership_residual(x)? <= self.member_tol(d))
    }

    /// A random point of the set together with the parameters that produced
    /// it (box field or convex weights). Box coordinates are pinned to a
    /// face with probability one half so samples also land on the boundary.
    pub fn sample(&self, seed: u64, index: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = stream(seed, index);
        match &self.repr {
            Repr::Vertices(v) => {
                let mut l: Vec<f64> = v
                    .iter()
                    .map(|_| -rng.gen::<f64>().max(1e-300).ln())
                    .collect();
                let total: f64 = l.iter().sum();
                l.iter_mut().for_each(|x| *x /= total);
                let mut x = vec![0.0; self.dim];
                for (p, &w) in v.iter().zip(&l) {
                    x.iter_mut().zip(p).for_each(|(x, p)| *x += w * p);
                }
                (x, l)
            }
            Repr::DivergenceBox { graph, alpha } => {
                let h: Vec<f64> = (0..graph.edge_count())
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            if rng.gen_bool(0.5) {
                                *alpha
                            } else {
                                -alpha
                            }
                        } else {
                            alpha * rng.gen_range(-1.0..1.0)
                        }
                    })
                    .collect();
                (unit_divergence(graph, &h).expect("edge count matches"), h)
            }
        }
    }
}

/// Admissible directions `e_i - e_j` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeDirections {
    pub base: Vec<f64>,
    /// `(i, j)` stands for `e_i - e_j`.
    pub directions: Vec<(usize, usize)>,
    pub eps: f64,
}

impl ConeDirections {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        let (i, j) = self.directions[k];
        let mut s = vec![0.0; self.base.len()];
        s[i] = 1.0;
        s[j] = -1.0;
        s
    }
}

/// The default probing scale, `1e-6` times the diameter (or `1e-6` for a
/// single point, where no direction is admissible at any scale).
pub fn default_eps(m: &PolytopeOracle) -> f64 {
    let d = m.diameter();
    1e-6 * if d > 0.0 { d } else { 1.0 }
}

/// All `e_i - e_j` with `x + t (e_i - e_j)` in `M` for some `t` in
/// `(0, eps]`. Step sizes are halved from `eps` down to `1e-3 * eps`.
pub fn cone_directions(m: &PolytopeOracle, x: &[f64], eps: f64) -> Result<ConeDirections> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Config(format!(
            "probing scale must be > 0, got {eps}"
        )));
    }
    let diameter = m.diameter();
    let tol = m.member_tol(diameter);
    let residual = m.membership_residual(x)?;
    if residual > tol {
        return Err(Error::Membership { residual });
    }
    let n = m.dim();
    let floor = 1e-3 * eps;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let admissible: Vec<bool> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut t = eps;
            let mut y = x.to_vec();
            while t >= floor {
                y[i] = x[i] + t;
                y[j] = x[j] - t;
                if m.membership_residual(&y).expect("dimension checked") <= tol {
                    return true;
                }
                t *= 0.5;
            }
            false
        })
        .collect();
    Ok(ConeDirections {
        base: x.to_vec(),
        directions: pairs
            .into_iter()
            .zip(admissible)
            .filter_map(|(p, ok)| ok.then_some(p))
            .collect(),
        eps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScpVerdict {
    pub holds: bool,
    /// Every extreme candidate was checked, not a random subset.
    pub exhaustive: bool,
    pub directions: usize,
    pub candidates: usize,
    /// Largest residual of `m - x` against the cone over all candidates.
    pub worst_residual: f64,
}

/// Whether every point of `M - x` is a nonnegative combination of the
/// admissible directions at `x`. A candidate is accepted when its cone
/// residual is at most `tol * max(1, |m - x|)`.
pub fn special_cone_check(
    m: &PolytopeOracle,
    x: &[f64],
    tol: f64,
    seed: u64,
) -> Result<ScpVerdict> {
    let dirs = cone_directions(m, x, default_eps(m))?;
    let (candidates, exhaustive) = m.extreme_candidates(seed);
    if candidates.iter().any(|c| c.len() != x.len()) {
        return Err(Error::Representation("candidate dimension mismatch".into()));
    }
    let n = x.len();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            dirs.directions
                .iter()
                .map(|&(i, j)| {
                    if r == i {
                        1.0
                    } else if r == j {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let residuals: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|c| {
            let b: Vec<f64> = c.iter().zip(x).map(|(c, x)| c - x).collect();
            let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            (phase_one(&a, &b).0, norm)
        })
        .collect();
    let holds = residuals.iter().all(|&(r, norm)| r <= tol * norm.max(1.0));
    Ok(ScpVerdict {
        holds,
        exhaustive,
        directions: dirs.directions.len(),
        candidates: candidates.len(),
        worst_residual: residuals.iter().map(|r| r.0).fold(0.0, f64::max),
    })
}

/// `b + t* (e_k - e_l)` with `t*` minimising `sum_i w_i phi((a_i - x_i) / w_i)`
/// over `t in [c, d]`, which is the same point for every convex `phi`.
pub fn segment_minimizer(
    a: &[f64],
    w: &[f64],
    b: &[f64],
    k: usize,
    l: usize,
    c: f64,
    d: f64,
) -> Result<Vec<f64>> {
    if !(c <= d) {
        return Err(Error::Interval { c, d });
    }
    check_len("weights", a.len(), w.len())?;
    check_len("base point", a.len(), b.len())?;
    if k == l || k >= a.len() || l >= a.len() {
        return Err(Error::Config(format!(
            "indices {k}, {l} must differ and be < {}",
            a.len()
        )));
    }
    if w.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Config("weights must be positive".into()));
    }
    let t = (((a[k] - b[k]) * w[l] - (a[l] - b[l]) * w[k]) / (w[k] + w[l])).clamp(c, d);
    let mut x = b.to_vec();
    x[k] += t;
    x[l] -= t;
    Ok(x)
}

/// The point of `M` closest to `a` in the norm `sum_i (a_i - x_i)^2 / w_i`.
///
/// For divergence images this is the dual ROF problem on the graph with
/// vertex weights `w` and datum `a / w`; `tol` is then the relative duality
/// gap. For vertex lists `tol` bounds Wolfe's optimality test relative to
/// the squared spread of the transformed points.
pub fn weighted_projection(m: &PolytopeOracle, a: &[f64], w: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_len("point", m.dim(), a.len())?;
    check_len("weights", m.dim(), w.len())?;
    if w.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Config("weights must be positive".into()));
    }
    match &m.repr {
        Repr::DivergenceBox { graph, alpha } => {
            let g = graph.with_vertex_weights(w.to_vec())?;
            let f: Vec<f64> = a.iter().zip(w).map(|(a, w)| a / w).collect();
            match solve_rof(&g, &f, *alpha, tol, DEFAULT_MAX_ITER) {
                Ok(sol) => unit_divergence(graph, &sol.h),
                Err(Error::NonConvergence {
                    iterations, best, ..
                }) => Err(Error::ProjectionNonConvergence {
                    iterations,
                    best: unit_divergence(graph, &best.h)?,
                }),
                Err(e) => Err(e),
            }
        }
        Repr::Vertices(v) => {
            let root: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
            let pts: Vec<Vec<f64>> = v
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(a)
                        .zip(&root)
                        .map(|((p, a), r)| (p - a) / r)
                        .collect()
                })
                .collect();
            let r = wolfe::min_norm_point(&pts, tol, WOLFE_MAX_ITER);
            let x = r
                .point
                .iter()
                .zip(a)
                .zip(&root)
                .map(|((y, a), r)| a + r * y)
                .collect();
            if r.converged {
                Ok(x)
            } else {
                Err(Error::ProjectionNonConvergence {
                    iterations: r.iterations,
                    best: x,
                })
            }
        }
    }
}

/// Checks that the weighted projection `x*` of `a` onto `M` beats random
/// members `x` of `M` for every catalog probe:
/// `sum w phi((a - x*) / w) <= sum w phi((a - x) / w) + tol`.
pub fn phi_min_audit(
    m: &PolytopeOracle,
    a: &[f64],
    w: &[f64],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AuditReport> {
    if n_samples == 0 {
        return Err(Error::Config("audit needs at least one sample".into()));
    }
    let best = weighted_projection(m, a, w, PROJECTION_TOL)?;
    let probes = all_probes();
    let mut fixed = vec![Fixed {
        label: "projection".into(),
        point: best.clone(),
    }];
    if let Repr::Vertices(v) = &m.repr {
        fixed.extend(v.iter().enumerate().map(|(k, p)| Fixed {
            label: format!("vertex {k}"),
            point: p.clone(),
        }));
    }
    let generator = match &m.repr {
        Repr::Vertices(v) => format!("random convex combinations of {} vertices", v.len()),
        Repr::DivergenceBox { graph, alpha } => format!(
            "div_W,1 H, H in [-{alpha}, {alpha}]^{} with faces pinned at rate 1/2",
            graph.edge_count()
        ),
    };
    Ok(run_audit(AuditSpec {
        generator,
        seed,
        samples: n_samples,
        tol,
        probes: &probes,
        scales: vec![1.0; probes.len()],
        best: &best,
        fixed,
        draw: |i| {
            let (x, _) = m.sample(seed, i as u64);
            (x.clone(), x)
        },
        value: |p, x| {
            a.iter()
                .zip(w)
                .zip(x)
                .map(|((a, w), x)| w * p.eval((a - x) / w))
                .sum()
        },
    }))
}
