//! Sampling audits of the minimality of ROF solutions.
//!
//! For a datum `f`, every competitor `u = f - div_{W,w} H` with `H` in the
//! box `[-alpha, alpha]^E` is compared with the ROF minimiser `u_alpha`
//! under a catalog of convex integrands. A violation is
//! `sum w phi(u_alpha) - sum w phi(u)`; the minimiser should never lose by
//! more than `tol * max(1, sum w |phi(f)|)`.

mod probe;
mod refine;

pub use probe::{all_probes, convex_catalog, linear_probes, probes_by_name, ConvexProbe};
pub use refine::{refinement_study, NestedCheck, RefinementLevel, RefinementStudy};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{check_len, Error, Result};
use crate::graph::{weighted_norm, WeightedGraph};
use crate::grid::{build_graph, build_partition, iota, subgradient_from_box, Grid, PcrFunction};
use crate::rof::{solve_rof, RofSolution, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::sampling::box_point;

/// Duality-gap target used when an audit solves for `u_alpha` itself.
pub const AUDIT_SOLVER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub probe: String,
    /// Largest signed violation over all competitors. Never negative, since
    /// the minimiser itself is one of the competitors.
    pub worst_violation: f64,
    pub scale: f64,
    /// `tol * scale`.
    pub allowed: f64,
    /// Competitor attaining `worst_violation`.
    pub witness: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub generator: String,
    pub seed: u64,
    pub samples: usize,
    pub competitors: usize,
    pub tol: f64,
    pub probes: Vec<ProbeOutcome>,
    pub pass: bool,
    /// Field or point realising the worst failing probe, if any.
    #[serde(skip)]
    pub witness_point: Option<Vec<f64>>,
}

impl AuditReport {
    /// Turns a failing report into [`Error::AuditViolation`] carrying the
    /// witness of the probe with the largest excess.
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            return Ok(self);
        }
        let worst = self
            .probes
            .iter()
            .filter(|p| !p.pass)
            .max_by(|a, b| {
                (a.worst_violation - a.allowed).total_cmp(&(b.worst_violation - b.allowed))
            })
            .expect("a failing report has a failing probe");
        let sample = worst
            .witness
            .strip_prefix("sample ")
            .and_then(|s| s.parse().ok())
            .unwrap_or(usize::MAX);
        Err(Error::AuditViolation {
            probe: worst.probe.clone(),
            violation: worst.worst_violation,
            allowed: worst.allowed,
            sample,
            witness: self.witness_point.unwrap_or_default(),
        })
    }

    /// One row per probe.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("probe,worst_violation,allowed,witness,pass\n");
        for p in &self.probes {
            out.push_str(&format!(
                "{},{:e},{:e},{},{}\n",
                p.probe, p.worst_violation, p.allowed, p.witness, p.pass
            ));
        }
        out
    }
}

/// A deterministic competitor: its label and the point it maps to.
pub(crate) struct Fixed {
    pub label: String,
    pub point: Vec<f64>,
}

/// Shared audit loop.
///
/// `best` is the claimed minimiser, `fixed` the deterministic competitors,
/// and `draw(i)` returns the witness for sample `i` together with the
/// competitor it produces. `value(probe, point)` is the quantity being
/// minimised.
pub(crate) struct AuditSpec<'a, D, V>
where
    D: Fn(usize) -> (Vec<f64>, Vec<f64>) + Sync,
    V: Fn(&ConvexProbe, &[f64]) -> f64 + Sync,
{
    pub generator: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub probes: &'a [ConvexProbe],
    pub scales: Vec<f64>,
    pub best: &'a [f64],
    pub fixed: Vec<Fixed>,
    pub draw: D,
    pub value: V,
}

pub(crate) fn run_audit<D, V>(spec: AuditSpec<'_, D, V>) -> AuditReport
where
    D: Fn(usize) -> (Vec<f64>, Vec<f64>) + Sync,
    V: Fn(&ConvexProbe, &[f64]) -> f64 + Sync,
{
    let probes = spec.probes;
    let eval = |x: &[f64]| -> Vec<f64> { probes.iter().map(|p| (spec.value)(p, x)).collect() };
    let base = eval(spec.best);

    let fixed_vals: Vec<Vec<f64>> = spec.fixed.iter().map(|c| eval(&c.point)).collect();
    let sample_vals: Vec<Vec<f64>> = (0..spec.samples)
        .into_par_iter()
        .map(|i| eval(&(spec.draw)(i).1))
        .collect();

    let labels = spec
        .fixed
        .iter()
        .map(|c| c.label.clone())
        .chain((0..spec.samples).map(|i| format!("sample {i}")));
    let all: Vec<(String, &Vec<f64>)> = labels.zip(fixed_vals.iter().chain(&sample_vals)).collect();

    let mut outcomes = Vec::with_capacity(probes.len());
    let mut worst_fail: Option<(f64, usize)> = None;
    for (p, probe) in probes.iter().enumerate() {
        let (mut worst, mut at) = (f64::NEG_INFINITY, 0);
        for (c, (_, vals)) in all.iter().enumerate() {
            let v = base[p] - vals[p];
            if v > worst || v.is_nan() {
                worst = v;
                at = c;
            }
        }
        let allowed = spec.tol * spec.scales[p];
        let pass = worst <= allowed;
        if !pass && worst_fail.map_or(true, |(e, _)| worst - allowed > e) {
            worst_fail = Some((worst - allowed, at));
        }
        outcomes.push(ProbeOutcome {
            probe: probe.name().to_string(),
            worst_violation: worst,
            scale: spec.scales[p],
            allowed,
            witness: all[at].0.clone(),
            pass,
        });
    }

    let witness_point = worst_fail.map(|(_, at)| match at.checked_sub(spec.fixed.len()) {
        Some(i) => (spec.draw)(i).0,
        None => spec.fixed[at].point.clone(),
    });
    AuditReport {
        generator: spec.generator,
        seed: spec.seed,
        samples: spec.samples,
        competitors: spec.samples + spec.fixed.len(),
        tol: spec.tol,
        pass: outcomes.iter().all(|o| o.pass),
        probes: outcomes,
        witness_point,
    }
}

fn check_audit_args(alpha: f64, n_samples: usize, tol: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Config(format!(
            "audit alpha must be > 0, got {alpha}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::Config("audit needs at least one sample".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::Config(format!("audit tol must be >= 0, got {tol}")));
    }
    Ok(())
}

fn probe_scales(probes: &[ConvexProbe], w: &[f64], f: &[f64]) -> Vec<f64> {
    probes
        .iter()
        .map(|p| {
            let s: f64 = w.iter().zip(f).map(|(w, &t)| w * p.eval(t).abs()).sum();
            s.max(1.0)
        })
        .collect()
}

/// Audits an already computed solution against sampled competitors. The
/// witness stored for a failing sample is its box field `H`.
pub fn audit_solution(
    g: &WeightedGraph,
    f: &[f64],
    sol: &RofSolution,
    probes: &[ConvexProbe],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AuditReport> {
    check_len("datum", g.vertex_count(), f.len())?;
    check_len("solution", g.vertex_count(), sol.u.len())?;
    check_audit_args(sol.alpha, n_samples, tol)?;
    let w = g.vertex_weights();
    let m = g.edge_count();
    let alpha = sol.alpha;
    Ok(run_audit(AuditSpec {
        generator: format!("f - div_W,w H, H uniform in [-{alpha}, {alpha}]^{m}"),
        seed,
        samples: n_samples,
        tol,
        probes,
        scales: probe_scales(probes, w, f),
        best: &sol.u,
        fixed: vec![
            Fixed {
                label: "datum".into(),
                point: f.to_vec(),
            },
            Fixed {
                label: "minimizer".into(),
                point: sol.u.clone(),
            },
        ],
        draw: |i| {
            let h = box_point(seed, i as u64, m, alpha);
            let mut div = vec![0.0; f.len()];
            g.divergence_into(&h, &mut div);
            let u = f.iter().zip(&div).map(|(f, d)| f - d).collect();
            (h, u)
        },
        value: |p, u| p.weighted_sum(w, u),
    }))
}

/// Solves ROF for `(g, f, alpha)` and audits the minimiser with the full
/// probe set.
pub fn minimality_audit(
    g: &WeightedGraph,
    f: &[f64],
    alpha: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AuditReport> {
    check_audit_args(alpha, n_samples, tol)?;
    let sol = solve_rof(g, f, alpha, AUDIT_SOLVER_TOL, DEFAULT_MAX_ITER)?;
    audit_solution(g, f, &sol, &all_probes(), n_samples, seed, tol)
}

/// Audit in cell-function form: competitors are `f - g` for sampled
/// subgradients `g` of the grid total variation, and integrals are
/// volume-weighted cell sums.
pub fn pcr_minimality_audit(
    grid: &Grid,
    f: &PcrFunction,
    alpha: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AuditReport> {
    check_audit_args(alpha, n_samples, tol)?;
    if f.grid() != grid {
        return Err(Error::Grid("datum lives on a different grid".into()));
    }
    let graph = build_graph(&build_partition(grid));
    let sol = solve_rof(&graph, &iota(f), alpha, AUDIT_SOLVER_TOL, DEFAULT_MAX_ITER)?;
    pcr_audit_solution(f, &sol, &all_probes(), n_samples, seed, tol)
}

/// [`pcr_minimality_audit`] for an already computed solution on `f`'s grid.
pub fn pcr_audit_solution(
    f: &PcrFunction,
    sol: &RofSolution,
    probes: &[ConvexProbe],
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AuditReport> {
    let grid = f.grid();
    check_len("solution", grid.cell_count(), sol.u.len())?;
    check_audit_args(sol.alpha, n_samples, tol)?;
    let alpha = sol.alpha;
    let graph = build_graph(&build_partition(grid));
    let vols = grid.cell_volumes();
    let m = graph.edge_count();
    let integral = |p: &ConvexProbe, u: &[f64]| -> f64 {
        vols.iter().zip(u).map(|(v, &t)| v * p.eval(t)).sum()
    };
    Ok(run_audit(AuditSpec {
        generator: format!(
            "f - sample_subgradient(grid, {alpha}) on {} cells",
            grid.cell_count()
        ),
        seed,
        samples: n_samples,
        tol,
        probes,
        scales: probe_scales(probes, &vols, f.values()),
        best: &sol.u,
        fixed: vec![
            Fixed {
                label: "datum".into(),
                point: f.values().to_vec(),
            },
            Fixed {
                label: "minimizer".into(),
                point: sol.u.clone(),
            },
        ],
        draw: |i| {
            let h = box_point(seed, i as u64, m, alpha);
            let sub = subgradient_from_box(grid, &graph, &h);
            let u = f
                .values()
                .iter()
                .zip(sub.values())
                .map(|(f, g)| f - g)
                .collect();
            (h, u)
        },
        value: integral,
    }))
}

/// One row of an `L^p` comparison between the minimiser and the datum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpRow {
    #[serde(serialize_with = "exponent")]
    pub p: f64,
    pub u_norm: f64,
    pub f_norm: f64,
}

fn exponent<S: Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

/// `||u||_{p,w}` against `||f||_{p,w}` for each `p` (`f64::INFINITY` is the
/// maximum norm).
pub fn lp_table(w: &[f64], u: &[f64], f: &[f64], p_list: &[f64]) -> Result<Vec<LpRow>> {
    check_len("minimiser", w.len(), u.len())?;
    check_len("datum", w.len(), f.len())?;
    p_list
        .iter()
        .map(|&p| {
            if !(p >= 1.0) {
                return Err(Error::Config(format!(
                    "norm exponent must be >= 1, got {p}"
                )));
            }
            Ok(LpRow {
                p,
                u_norm: weighted_norm(w, u, p),
                f_norm: weighted_norm(w, f, p),
            })
        })
        .collect()
}

pub fn lp_norms_report(
    g: &WeightedGraph,
    f: &[f64],
    alpha: f64,
    p_list: &[f64],
) -> Result<Vec<LpRow>> {
    let sol = solve_rof(g, f, alpha, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    lp_table(g.vertex_weights(), &sol.u, f, p_list)
}
