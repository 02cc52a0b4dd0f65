//! Counter-based derivation of per-replication random streams.
//!
//! Every replication owns a ChaCha stream keyed by `(master seed, purpose)` and
//! selected by the replication index, so a replication's draws never depend on
//! which worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Distinct purposes get disjoint keys; keep these stable, they are part of the
/// reproducibility contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Path = 1,
    Exponential = 2,
    Atoms = 3,
    Bridge = 4,
    Conditioning = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for replication `index` of the given purpose.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(purpose as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Derive a child seed, e.g. for the second half of a paired experiment.
pub fn child_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(salt)))
}

/// Uniform draw on (0, 1]. Exponentials and Pareto variables are built from
/// the same draw so `-ln u` and `1/u` describe the same event exactly.
#[inline]
pub fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
