//! Command orchestration behind the `anisotv` binary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::conegeom::{special_cone_check, PolytopeOracle, ScpVerdict};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::graph::{total_variation, WeightedGraph};
use crate::grid::{build_graph, build_partition, PcrFunction};
use crate::io::{load_dataset, read_graph, read_vertices, save_dataset, Dataset, Format};
use crate::minimality::{
    audit_solution, lp_table, pcr_audit_solution, probes_by_name, refinement_study, LpRow,
    AUDIT_SOLVER_TOL,
};
use crate::rof::{solve_rof, RofSolution};

/// Cone residual accepted by `cone-check`, relative to `|m - x|`.
pub const CONE_TOL: f64 = 1e-10;
/// Slack on the norm inequalities of `refine-study`.
pub const REFINE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Denoise,
    Audit,
    RefineStudy,
    ConeCheck,
}

#[derive(Debug, Clone)]
pub enum Input {
    Data(Dataset),
    /// A graph and its vertex datum, if one was supplied.
    Graph(WeightedGraph, Option<Vec<f64>>),
    Polytope(PolytopeOracle),
}

/// Reads `path` as the kind of input `cmd` expects. `.graph` files are
/// graphs; for `cone-check` a `.csv` file is a vertex list; everything
/// else is a dataset.
pub fn load_input(cmd: Command, path: &Path, hint: Option<&str>, cfg: &RunConfig) -> Result<Input> {
    load_input_inner(cmd, path, hint, cfg).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        e => e,
    })
}

fn load_input_inner(
    cmd: Command,
    path: &Path,
    hint: Option<&str>,
    cfg: &RunConfig,
) -> Result<Input> {
    let ext = hint
        .map(str::to_ascii_lowercase)
        .or_else(|| {
            path.extension()
                .map(|e| e.to_string_lossy().to_ascii_lowercase())
        })
        .unwrap_or_default();
    match (cmd, ext.as_str()) {
        (_, "graph") => {
            let g = read_graph(path)?;
            let datum = match &cfg.datum {
                Some(p) => {
                    let d = load_dataset(p, Some("csv"))?;
                    Some(d.values)
                }
                None => None,
            };
            Ok(Input::Graph(g, datum))
        }
        (Command::ConeCheck, "csv" | "vertices") => Ok(Input::Polytope(
            PolytopeOracle::from_vertices(read_vertices(path)?)?,
        )),
        _ => {
            let mut data = load_dataset(path, hint)?;
            if cfg.normalize {
                if let Format::Pgm { maxval, .. } = data.format {
                    data.values.iter_mut().for_each(|v| *v /= maxval as f64);
                }
            }
            Ok(Input::Data(data))
        }
    }
}

/// Files written so far; removed again unless the run completes or
/// fails a check whose report they hold.
struct Artifacts {
    paths: Vec<PathBuf>,
    done: bool,
}

impl Artifacts {
    fn new() -> Self {
        Self {
            paths: Vec::new(),
            done: false,
        }
    }

    fn write(&mut self, path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
        self.paths.push(path.clone());
        fs::write(&path, contents)?;
        Ok(())
    }

    fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, text)
    }

    fn finish(mut self) -> Vec<PathBuf> {
        self.done = true;
        std::mem::take(&mut self.paths)
    }
}

impl Drop for Artifacts {
    fn drop(&mut self) {
        if !self.done {
            for p in &self.paths {
                let _ = fs::remove_file(p);
            }
        }
    }
}

#[derive(Serialize)]
struct DenoiseReport<'a> {
    alpha: f64,
    tol: f64,
    gap: f64,
    relative_gap: f64,
    iterations: usize,
    total_variation: f64,
    objective: f64,
    lp_norms: &'a [LpRow],
    output: String,
}

#[derive(Serialize)]
struct ConePoint {
    index: usize,
    point: Vec<f64>,
    verdict: ScpVerdict,
}

#[derive(Serialize)]
struct ConeReport {
    seed: u64,
    dimension: usize,
    points: Vec<ConePoint>,
    all_hold: bool,
}

fn graph_and_datum(
    input: &Input,
    what: &str,
) -> Result<(WeightedGraph, Vec<f64>, Option<Dataset>)> {
    match input {
        Input::Data(d) => Ok((
            build_graph(&build_partition(&d.grid)),
            d.values.clone(),
            Some(d.clone()),
        )),
        Input::Graph(g, Some(f)) => Ok((g.clone(), f.clone(), None)),
        Input::Graph(_, None) => Err(Error::Config(format!("{what} on a graph needs `datum`"))),
        Input::Polytope(_) => Err(Error::Config(format!("{what} needs a dataset or a graph"))),
    }
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Runs `cmd` and returns the files it wrote under `cfg.out`, named
/// `<stem>.<command>.*`. On error nothing is left behind.
pub fn run_pipeline(
    cmd: Command,
    cfg: &RunConfig,
    input: &Input,
    stem: &str,
) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let base = |suffix: &str| cfg.out.join(format!("{stem}.{suffix}"));
    let mut art = Artifacts::new();

    match cmd {
        Command::Denoise => {
            let (g, f, data) = graph_and_datum(input, "denoise")?;
            let sol = solve_rof(&g, &f, cfg.alpha, cfg.tol, cfg.max_iter)?;
            let lp = lp_table(g.vertex_weights(), &sol.u, &f, &cfg.p_list)?;
            let written = write_solution(&mut art, &sol, data.as_ref(), cfg, &base("denoised"))?;
            let report = DenoiseReport {
                alpha: sol.alpha,
                tol: cfg.tol,
                gap: sol.gap,
                relative_gap: sol.relative_gap,
                iterations: sol.iterations,
                total_variation: total_variation(&g, &sol.u)?,
                objective: sol.objective(&g, &f),
                lp_norms: &lp,
                output: file_name(&written),
            };
            art.json(base("denoised.json"), &report)?;
        }
        Command::Audit => {
            let (g, f, data) = graph_and_datum(input, "audit")?;
            let probes = probes_by_name(&cfg.probes)?;
            let sol = solve_rof(&g, &f, cfg.alpha, AUDIT_SOLVER_TOL, cfg.max_iter)?;
            let report = match data {
                Some(d) => {
                    let pcr = PcrFunction::new(d.grid.clone(), f)?;
                    pcr_audit_solution(&pcr, &sol, &probes, cfg.n_samples, cfg.seed, cfg.audit_tol)?
                }
                None => audit_solution(
                    &g,
                    &f,
                    &sol,
                    &probes,
                    cfg.n_samples,
                    cfg.seed,
                    cfg.audit_tol,
                )?,
            };
            art.json(base("audit.json"), &report)?;
            art.write(base("audit.csv"), report.to_csv())?;
            if let Err(e) = report.into_result() {
                art.finish();
                return Err(e);
            }
        }
        Command::RefineStudy => {
            let Input::Data(d) = input else {
                return Err(Error::Config("refine-study needs a gridded dataset".into()));
            };
            let f = PcrFunction::new(d.grid.clone(), d.values.clone())?;
            let study = refinement_study(
                &f,
                cfg.alpha,
                cfg.tol,
                cfg.max_iter,
                &cfg.levels,
                &cfg.nested,
                REFINE_SLACK,
            )?;
            art.json(base("refine.json"), &study)?;
            let mut csv =
                String::from("m,cells,diameter,solution_norm,averaged_norm,reference_norm\n");
            for l in &study.levels {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    l.m,
                    l.cells,
                    l.diameter,
                    l.solution_norm,
                    l.averaged_norm,
                    study.reference_norm
                ));
            }
            art.write(base("refine.csv"), csv)?;
            if !study.chain_holds {
                art.finish();
                return Err(Error::Invariant(
                    "refinement norms violate the monotone chain".into(),
                ));
            }
            if let Some(c) = study
                .nested
                .iter()
                .find(|c| c.max_deviation > 10.0 * cfg.tol)
            {
                art.finish();
                return Err(Error::Invariant(format!(
                    "solution on the {}-fold refinement deviates by {:e} after averaging",
                    c.factor, c.max_deviation
                )));
            }
        }
        Command::ConeCheck => {
            let m = match input {
                Input::Polytope(m) => m.clone(),
                Input::Graph(g, _) => PolytopeOracle::divergence_box(g.clone(), cfg.alpha)?,
                Input::Data(_) => {
                    return Err(Error::Config(
                        "cone-check needs a vertex list or a graph".into(),
                    ))
                }
            };
            let points = (0..cfg.n_samples)
                .map(|i| {
                    let (x, _) = m.sample(cfg.seed, i as u64);
                    let verdict = special_cone_check(&m, &x, CONE_TOL, cfg.seed)?;
                    Ok(ConePoint {
                        index: i,
                        point: x,
                        verdict,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let report = ConeReport {
                seed: cfg.seed,
                dimension: m.dim(),
                all_hold: points.iter().all(|p| p.verdict.holds),
                points,
            };
            art.json(base("cone.json"), &report)?;
        }
    }
    Ok(art.finish())
}

fn write_solution(
    art: &mut Artifacts,
    sol: &RofSolution,
    data: Option<&Dataset>,
    cfg: &RunConfig,
    base: &Path,
) -> Result<PathBuf> {
    let Some(data) = data else {
        let mut text = String::new();
        for v in &sol.u {
            text.push_str(&format!("{v}\n"));
        }
        let path = base.with_extension("denoised.csv");
        art.write(path.clone(), text)?;
        return Ok(path);
    };
    let mut values = sol.u.clone();
    if let Format::Pgm { maxval, .. } = data.format {
        if cfg.normalize && cfg.quantize {
            values.iter_mut().for_each(|v| *v *= maxval as f64);
        }
    }
    let out = data.with_values(values)?;
    let path = base.with_extension(format!("denoised.{}", data.format.extension()));
    // register first so a failed write is cleaned up too
    let written = match out.format {
        Format::Pgm { .. } if !cfg.quantize => path.with_extension("csv"),
        _ => path.clone(),
    };
    art.paths.push(written);
    if matches!(out.format, Format::Pcr { .. }) {
        art.paths.push(path.with_extension("grid"));
    }
    save_dataset(&out, &path, cfg.quantize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::io::DatasetKind;
    use tempfile::tempdir;

    fn signal(values: Vec<f64>) -> Input {
        let n = values.len();
        let grid = Grid::uniform(&[(0.0, n as f64)], &[n]).unwrap();
        Input::Data(Dataset::new(DatasetKind::Signal, grid, values, Format::Csv).unwrap())
    }

    #[test]
    fn denoise_two_pixels() {
        let dir = tempdir().unwrap();
        let cfg = RunConfig {
            alpha: 0.5,
            out: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let files = run_pipeline(Command::Denoise, &cfg, &signal(vec![0.0, 2.0]), "s").unwrap();
        assert_eq!(files.len(), 2);
        assert!(files.iter().all(|p| p.exists()), "{files:?}");
        let out = load_dataset(&files[0], None).unwrap();
        assert!((out.values[0] - 0.5).abs() < 1e-9 && (out.values[1] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn failed_run_leaves_nothing() {
        let dir = tempdir().unwrap();
        let cfg = RunConfig {
            alpha: 0.3,
            max_iter: 1,
            tol: 1e-15,
            out: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let f: Vec<f64> = (0..50).map(|i| (1.3 * i as f64).sin()).collect();
        let err = run_pipeline(Command::Denoise, &cfg, &signal(f), "s").unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn audit_reports_are_reproducible() {
        let dir = tempdir().unwrap();
        let cfg = RunConfig {
            alpha: 0.4,
            n_samples: 30,
            seed: 5,
            out: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let input = signal(vec![0.3, -1.0, 2.0, 0.1, 0.0]);
        let a = run_pipeline(Command::Audit, &cfg, &input, "a").unwrap();
        let first = fs::read(&a[0]).unwrap();
        run_pipeline(Command::Audit, &cfg, &input, "a").unwrap();
        assert_eq!(first, fs::read(&a[0]).unwrap());
    }
}
