use std::fmt;

use crate::error::{Error, Result};

/// A named convex function of one real variable.
#[derive(Clone, Copy)]
pub struct ConvexProbe {
    name: &'static str,
    eval: fn(f64) -> f64,
}

impl ConvexProbe {
    pub const fn new(name: &'static str, eval: fn(f64) -> f64) -> Self {
        Self { name, eval }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// `sum_i w_i phi(u_i)`.
    pub fn weighted_sum(&self, w: &[f64], u: &[f64]) -> f64 {
        w.iter().zip(u).map(|(w, &t)| w * (self.eval)(t)).sum()
    }
}

impl fmt::Debug for ConvexProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ConvexProbe").field(&self.name).finish()
    }
}

fn huber(t: f64) -> f64 {
    const DELTA: f64 = 0.5;
    if t.abs() <= DELTA {
        0.5 * t * t
    } else {
        DELTA * (t.abs() - 0.5 * DELTA)
    }
}

const CATALOG: [ConvexProbe; 10] = [
    ConvexProbe::new("abs", |t| t.abs()),
    ConvexProbe::new("square", |t| t * t),
    ConvexProbe::new("abs_shift_0.7", |t| (t - 0.7).abs()),
    ConvexProbe::new("positive_part", |t| t.max(0.0)),
    ConvexProbe::new("abs_pow_1.5", |t| t.abs().powf(1.5)),
    ConvexProbe::new("abs_pow_3", |t| t.abs().powi(3)),
    ConvexProbe::new("pow_4", |t| t.powi(4)),
    ConvexProbe::new("exp", f64::exp),
    ConvexProbe::new("huber_0.5", huber),
    ConvexProbe::new("asymmetric_0.3_2", |t| (0.3 * t).max(-2.0 * t)),
];

const LINEAR: [ConvexProbe; 2] = [
    ConvexProbe::new("identity", |t| t),
    ConvexProbe::new("negation", |t| -t),
];

/// The ten nonlinear probes used by every audit.
pub fn convex_catalog() -> Vec<ConvexProbe> {
    CATALOG.to_vec()
}

/// `t` and `-t`. Over any translate of a set of divergences their weighted
/// sums are constant, so audits report them separately as a sanity check.
pub fn linear_probes() -> Vec<ConvexProbe> {
    LINEAR.to_vec()
}

/// Catalog plus linear probes.
pub fn all_probes() -> Vec<ConvexProbe> {
    CATALOG.iter().chain(&LINEAR).copied().collect()
}

/// Looks probes up by name; an empty selection means [`all_probes`].
pub fn probes_by_name<S: AsRef<str>>(names: &[S]) -> Result<Vec<ConvexProbe>> {
    if names.is_empty() {
        return Ok(all_probes());
    }
    names
        .iter()
        .map(|n| {
            let n = n.as_ref();
            CATALOG
                .iter()
                .chain(&LINEAR)
                .find(|p| p.name == n)
                .copied()
                .ok_or_else(|| Error::Config(format!("unknown probe `{n}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn probe(name: &str) -> ConvexProbe {
        probes_by_name(&[name]).unwrap()[0]
    }

    #[test]
    fn catalog_values() {
        assert_eq!(probe("square").eval(3.0), 9.0);
        assert_eq!(probe("abs_shift_0.7").eval(0.7), 0.0);
        assert!((probe("huber_0.5").eval(0.4) - 0.08).abs() < 1e-16);
        assert_eq!(probe("huber_0.5").eval(-2.0), 0.875);
        assert_eq!(probe("asymmetric_0.3_2").eval(-1.0), 2.0);
        assert!((probe("asymmetric_0.3_2").eval(10.0) - 3.0).abs() < 1e-15);
        assert_eq!(convex_catalog().len(), 10);
        assert!(probes_by_name(&["cosh"]).is_err());
    }

    #[test]
    fn convex_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in all_probes() {
            for _ in 0..1000 {
                let s: f64 = rng.gen_range(-5.0..5.0);
                let t: f64 = rng.gen_range(-5.0..5.0);
                let l: f64 = rng.gen_range(0.0..=1.0);
                let mid = p.eval(l * s + (1.0 - l) * t);
                let chord = l * p.eval(s) + (1.0 - l) * p.eval(t);
                let scale = 1.0 + p.eval(s).abs() + p.eval(t).abs();
                assert!(mid <= chord + 1e-12 * scale, "{} at {s}, {t}", p.name());
            }
        }
    }
}
