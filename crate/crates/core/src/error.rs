use thiserror::Error;

use crate::rof::RofSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("solver did not reach tolerance after {iterations} iterations (relative gap {relative_gap:e})")]
    NonConvergence {
        iterations: usize,
        relative_gap: f64,
        best: Box<RofSolution>,
    },

    #[error("infeasible certificate: {0}")]
    InfeasibleCertificate(String),

    #[error("not a chain: {0}")]
    Topology(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("grids are not nested: {0}")]
    Refinement(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("empty interval [{c}, {d}]")]
    Interval { c: f64, d: f64 },

    #[error("point is not a member of the polytope (residual {residual:e})")]
    Membership { residual: f64 },

    #[error("invalid polytope representation: {0}")]
    Representation(String),

    #[error("projection did not converge after {iterations} iterations")]
    ProjectionNonConvergence { iterations: usize, best: Vec<f64> },

    #[error(
        "audit violation for probe `{probe}`: {violation:e} exceeds {allowed:e} (sample {sample})"
    )]
    AuditViolation {
        probe: String,
        violation: f64,
        allowed: f64,
        sample: usize,
        witness: Vec<f64>,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config(_) => 2,
            Error::NonConvergence { .. } | Error::ProjectionNonConvergence { .. } => 3,
            Error::AuditViolation { .. } => 4,
            Error::Invariant(_)
            | Error::InfeasibleCertificate(_)
            | Error::Shape { .. }
            | Error::Graph(_)
            | Error::Topology(_)
            | Error::Grid(_)
            | Error::Refinement(_)
            | Error::Interval { .. }
            | Error::Membership { .. }
            | Error::Representation(_) => 5,
            Error::Io(_) | Error::Json(_) => 1,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Shape {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
