//! Deterministic stream splitting.
//!
//! One simulation consumes several independent random streams per round, one
//! per pipeline stage, so that a change in one stage (say, a different number
//! of manuscripts) never perturbs the draws of another. Stream identity is a
//! splitmix64 hash of `(seed, round, stage)`; the generator itself is ChaCha8,
//! which is stable across platforms and rand versions.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Pipeline stages with their own random stream inside one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Generation = 0,
    Estimation = 1,
    Targeting = 2,
    Assignment = 3,
    Review = 4,
}

const ROUND_SALT: u64 = 0x9E37_79B9_7F4A_7C15;
const STAGE_SALT: u64 = 0xBF58_476D_1CE4_E5B9;

/// splitmix64 finalizer; bijective on u64.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for one `(seed, round, stage)` triple.
pub fn round_stream(seed: u64, round: u32, stage: Stage) -> Stream {
    let r = splitmix64(seed ^ ROUND_SALT.wrapping_mul(round as u64 + 1));
    let s = splitmix64(r ^ STAGE_SALT.wrapping_mul(stage as u64 + 1));
    ChaCha8Rng::seed_from_u64(s)
}

/// Per-run seed for a sweep cell: `seed_base ⊕ hash(n, replication)`.
/// The hash is bijective in `(n, replication)`, so distinct cells always get
/// distinct seeds.
pub fn derive_seed(seed_base: u64, n: u32, replication: u32) -> u64 {
    seed_base ^ splitmix64(((n as u64) << 32) | replication as u64)
}
