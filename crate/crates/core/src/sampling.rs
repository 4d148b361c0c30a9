//! Deterministic random streams. Sample `index` under `seed` always sees the
//! same numbers, whichever thread evaluates it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A point drawn uniformly from `[-alpha, alpha]^len`.
pub(crate) fn box_point(seed: u64, index: u64, len: usize, alpha: f64) -> Vec<f64> {
    let mut rng = stream(seed, index);
    (0..len).map(|_| alpha * rng.gen_range(-1.0..1.0)).collect()
}
