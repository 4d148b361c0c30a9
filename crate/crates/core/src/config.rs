use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::rof::{DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Settings shared by all commands. Files hold flat `key = value` lines;
/// command-line flags are applied afterwards and win.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    /// Relative duality gap for the solver.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub n_samples: usize,
    /// Tolerance for audit violations, relative to each probe's scale.
    pub audit_tol: f64,
    /// Empty means every probe.
    pub probes: Vec<String>,
    pub p_list: Vec<f64>,
    pub levels: Vec<usize>,
    pub nested: Vec<usize>,
    pub out: PathBuf,
    /// Vertex values for graph inputs, one per line.
    pub datum: Option<PathBuf>,
    pub quantize: bool,
    /// Divide PGM values by maxval on input.
    pub normalize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            n_samples: 100,
            audit_tol: 1e-7,
            probes: Vec::new(),
            p_list: vec![1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY],
            levels: vec![1, 2, 4, 8],
            nested: vec![2, 4],
            out: PathBuf::from("."),
            datum: None,
            quantize: false,
            normalize: false,
        }
    }
}

fn list<T>(key: &str, value: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse(t).ok_or_else(|| Error::Config(format!("{key}: cannot parse `{t}`"))))
        .collect()
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got `{value}`"
        ))),
    }
}

fn exponent(t: &str) -> Option<f64> {
    match t {
        "inf" | "infinity" => Some(f64::INFINITY),
        _ => t.parse().ok(),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "alpha" => self.alpha = scalar(key, value)?,
            "tol" => self.tol = scalar(key, value)?,
            "max_iter" => self.max_iter = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "n_samples" | "samples" => self.n_samples = scalar(key, value)?,
            "audit_tol" => self.audit_tol = scalar(key, value)?,
            "probes" => self.probes = list(key, value, |t| Some(t.to_string()))?,
            "p_list" => self.p_list = list(key, value, exponent)?,
            "levels" => self.levels = list(key, value, |t| t.parse().ok())?,
            "nested" => self.nested = list(key, value, |t| t.parse().ok())?,
            "out" => self.out = PathBuf::from(value),
            "datum" => self.datum = Some(PathBuf::from(value)),
            "quantize" => self.quantize = flag(key, value)?,
            "normalize" => self.normalize = flag(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(text, origin)?;
        Ok(cfg)
    }

    pub fn apply_str(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key = value`"))?;
            self.set(k, v)
                .map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.audit_tol >= 0.0) {
            return Err(Error::Config(format!(
                "audit_tol must be >= 0, got {}",
                self.audit_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(**p >= 1.0)) {
            return Err(Error::Config(format!("norm exponent {p} is below 1")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut cfg = RunConfig::parse_str(
            "# run\nalpha = 0.5\nseed=7\np_list = 1, 2, inf\nprobes = abs,square\nquantize = yes\n",
            "cfg",
        )
        .unwrap();
        assert_eq!(cfg.alpha, 0.5);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.p_list, vec![1.0, 2.0, f64::INFINITY]);
        assert_eq!(cfg.probes, vec!["abs", "square"]);
        assert!(cfg.quantize);
        cfg.set("alpha", "2").unwrap();
        assert_eq!(cfg.alpha, 2.0);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        let err = RunConfig::parse_str("alpha = 1\nbeta = 2\n", "cfg").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(RunConfig::parse_str("alpha 1", "cfg").is_err());
        let mut cfg = RunConfig::default();
        cfg.alpha = -1.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 1.0;
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
    }
}
