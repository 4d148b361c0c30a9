//! C interface to `anisotv`.
//!
//! Graphs and solutions are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns an
//! [`AnisotvStatus`]; on failure [`anisotv_last_error`] holds a message for
//! the calling thread. Array arguments are read as `len` contiguous doubles
//! and may be null only when `len` is zero.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use anisotv::graph::{total_variation, weighted_divergence};
use anisotv::minimality::minimality_audit;
use anisotv::rof::{solve_chain_exact, solve_rof, RofSolution};
use anisotv::{Error, WeightedGraph};

/// Status codes. The nonzero values match the exit codes of the CLI where
/// the two overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnisotvStatus {
    Ok = 0,
    Io = 1,
    Parse = 2,
    NonConvergence = 3,
    AuditViolation = 4,
    Invalid = 5,
    NullArgument = 6,
    Panic = 7,
}

/// Opaque weighted graph.
pub struct AnisotvGraph(WeightedGraph);

/// Opaque ROF solution.
pub struct AnisotvSolution(RofSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> AnisotvStatus {
    match err.exit_code() {
        1 => AnisotvStatus::Io,
        2 => AnisotvStatus::Parse,
        3 => AnisotvStatus::NonConvergence,
        4 => AnisotvStatus::AuditViolation,
        _ => AnisotvStatus::Invalid,
    }
}

fn fail(err: Error) -> AnisotvStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null_arg(name: &str) -> AnisotvStatus {
    set_error(format!("{name} is null"));
    AnisotvStatus::NullArgument
}

fn guard(f: impl FnOnce() -> AnisotvStatus) -> AnisotvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            AnisotvStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize) -> Option<&'a mut [T]> {
    if len == 0 {
        Some(&mut [])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts_mut(p, len))
    }
}

macro_rules! arg {
    ($e:expr, $name:literal) => {
        match $e {
            Some(v) => v,
            None => return null_arg($name),
        }
    };
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn anisotv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a graph with `n_vertices` vertices and `n_edges` edges
/// `tails[k] -> heads[k]`.
///
/// # Safety
/// Array arguments must point to at least as many elements as their
/// length argument; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anisotv_graph_new(
    n_vertices: usize,
    vertex_weights: *const f64,
    n_edges: usize,
    tails: *const usize,
    heads: *const usize,
    edge_weights: *const f64,
    out: *mut *mut AnisotvGraph,
) -> AnisotvStatus {
    guard(|| {
        if out.is_null() {
            return null_arg("out");
        }
        let w = arg!(slice(vertex_weights, n_vertices), "vertex_weights");
        let t = arg!(slice(tails, n_edges), "tails");
        let h = arg!(slice(heads, n_edges), "heads");
        let ew = arg!(slice(edge_weights, n_edges), "edge_weights");
        let edges = t.iter().copied().zip(h.iter().copied()).collect();
        match WeightedGraph::new(w.to_vec(), edges, ew.to_vec()) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(AnisotvGraph(g)));
                AnisotvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reads a graph file (`n m` header, vertex weights, then `i j W` lines).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anisotv_graph_load(
    path: *const c_char,
    out: *mut *mut AnisotvGraph,
) -> AnisotvStatus {
    guard(|| {
        if path.is_null() {
            return null_arg("path");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not valid UTF-8".into());
            return AnisotvStatus::Parse;
        };
        match anisotv::io::read_graph(Path::new(path)) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(AnisotvGraph(g)));
                AnisotvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `g` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anisotv_graph_free(g: *mut AnisotvGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anisotv_graph_vertex_count(g: *const AnisotvGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anisotv_graph_edge_count(g: *const AnisotvGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Weighted divergence of the edge field `h` (one value per edge) into
/// `out` (one value per vertex).
///
/// # Safety
/// `h` and `out` must hold the edge and vertex counts of `g`.
#[no_mangle]
pub unsafe extern "C" fn anisotv_divergence(
    g: *const AnisotvGraph,
    h: *const f64,
    out: *mut f64,
) -> AnisotvStatus {
    guard(|| {
        let g = &arg!(g.as_ref(), "g").0;
        let h = arg!(slice(h, g.edge_count()), "h");
        let out = arg!(slice_mut(out, g.vertex_count()), "out");
        match weighted_divergence(g, h) {
            Ok(d) => {
                out.copy_from_slice(&d);
                AnisotvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `u` must hold the vertex count of `g`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anisotv_total_variation(
    g: *const AnisotvGraph,
    u: *const f64,
    out: *mut f64,
) -> AnisotvStatus {
    guard(|| {
        let g = &arg!(g.as_ref(), "g").0;
        let u = arg!(slice(u, g.vertex_count()), "u");
        let out = arg!(out.as_mut(), "out");
        match total_variation(g, u) {
            Ok(v) => {
                *out = v;
                AnisotvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Solves ROF on `g` with datum `f`. When the tolerance is not reached the
/// status is `NonConvergence` and `out` still receives the best iterate.
///
/// # Safety
/// `f` must hold the vertex count of `g`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solve_rof(
    g: *const AnisotvGraph,
    f: *const f64,
    alpha: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut AnisotvSolution,
) -> AnisotvStatus {
    guard(|| {
        let g = &arg!(g.as_ref(), "g").0;
        let f = arg!(slice(f, g.vertex_count()), "f");
        if out.is_null() {
            return null_arg("out");
        }
        *out = ptr::null_mut();
        match solve_rof(g, f, alpha, tol, max_iter) {
            Ok(sol) => {
                *out = Box::into_raw(Box::new(AnisotvSolution(sol)));
                AnisotvStatus::Ok
            }
            Err(Error::NonConvergence {
                iterations,
                relative_gap,
                best,
            }) => {
                *out = Box::into_raw(Box::new(AnisotvSolution(*best)));
                set_error(format!(
                    "solver did not reach tolerance after {iterations} iterations (relative gap {relative_gap:e})"
                ));
                AnisotvStatus::NonConvergence
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_free(s: *mut AnisotvSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of vertex values in the primal solution.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_len(s: *const AnisotvSolution) -> usize {
    s.as_ref().map_or(0, |s| s.0.u.len())
}

/// Number of edge values in the dual field.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_dual_len(s: *const AnisotvSolution) -> usize {
    s.as_ref().map_or(0, |s| s.0.h.len())
}

/// Copies the primal solution into `out`, which holds `len` values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_primal(
    s: *const AnisotvSolution,
    out: *mut f64,
    len: usize,
) -> AnisotvStatus {
    guard(|| copy_out(&arg!(s.as_ref(), "s").0.u, out, len))
}

/// Copies the dual edge field into `out`, which holds `len` values.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_dual(
    s: *const AnisotvSolution,
    out: *mut f64,
    len: usize,
) -> AnisotvStatus {
    guard(|| copy_out(&arg!(s.as_ref(), "s").0.h, out, len))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> AnisotvStatus {
    if len != src.len() {
        set_error(format!("buffer holds {len} values, need {}", src.len()));
        return AnisotvStatus::Invalid;
    }
    let out = arg!(slice_mut(out, len), "out");
    out.copy_from_slice(src);
    AnisotvStatus::Ok
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_gap(s: *const AnisotvSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.gap)
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_relative_gap(s: *const AnisotvSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.relative_gap)
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solution_iterations(s: *const AnisotvSolution) -> usize {
    s.as_ref().map_or(0, |s| s.0.iterations)
}

/// Exact ROF minimiser on the chain `0 - 1 - ... - n-1`. `edge_weights`
/// holds `n - 1` values; `out` receives `n`.
///
/// # Safety
/// Arrays must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn anisotv_solve_chain(
    n: usize,
    f: *const f64,
    vertex_weights: *const f64,
    edge_weights: *const f64,
    alpha: f64,
    out: *mut f64,
) -> AnisotvStatus {
    guard(|| {
        let f = arg!(slice(f, n), "f");
        let w = arg!(slice(vertex_weights, n), "vertex_weights");
        let ew = arg!(slice(edge_weights, n.saturating_sub(1)), "edge_weights");
        let out = arg!(slice_mut(out, n), "out");
        match solve_chain_exact(f, w, ew, alpha) {
            Ok(u) => {
                out.copy_from_slice(&u);
                AnisotvStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Solves ROF and compares the minimiser against `n_samples` competitors
/// under every probe. `worst` receives the largest violation relative to
/// its probe scale; the status is `AuditViolation` when it exceeds `tol`.
///
/// # Safety
/// `f` must hold the vertex count of `g`; `worst` may be null.
#[no_mangle]
pub unsafe extern "C" fn anisotv_audit(
    g: *const AnisotvGraph,
    f: *const f64,
    alpha: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
    worst: *mut f64,
) -> AnisotvStatus {
    guard(|| {
        let g = &arg!(g.as_ref(), "g").0;
        let f = arg!(slice(f, g.vertex_count()), "f");
        let report = match minimality_audit(g, f, alpha, n_samples, seed, tol) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        if let Some(out) = worst.as_mut() {
            *out = report
                .probes
                .iter()
                .map(|p| p.worst_violation / p.scale)
                .fold(f64::NEG_INFINITY, f64::max);
        }
        match report.into_result() {
            Ok(_) => AnisotvStatus::Ok,
            Err(e) => fail(e),
        }
    })
}
