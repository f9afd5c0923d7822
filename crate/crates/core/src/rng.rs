//! Reproducible random streams.
//!
//! Every sampler takes an explicit [`Stream`]. Streams are ChaCha8 generators
//! keyed by a 64-bit seed and a 64-bit stream id:
//!
//! * walker `i` of a run seeded with `seed` uses `walker_stream(seed, i)`,
//!   i.e. `ChaCha8Rng::seed_from_u64(seed)` with `set_stream(i)`;
//! * per-vertex randomness (Wilson stacks, walks rooted at a vertex) uses
//!   `vertex_stream(seed, v)`, whose stream id is a SplitMix64 hash of the
//!   coordinates of `v`;
//! * nested runs (sample `i` of an experiment, forest `j` of a sample) derive
//!   child seeds with [`sub_seed`].
//!
//! Results therefore never depend on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::Vertex;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed number `index` of `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn walker_stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn vertex_key(v: &Vertex) -> u64 {
    let mut h = mix64(v.n as u64 ^ ((v.x.len() as u64) << 56));
    for &c in &v.x {
        h = mix64(h ^ c as u64);
    }
    h
}

pub fn vertex_stream(seed: u64, v: &Vertex) -> Stream {
    walker_stream(seed, vertex_key(v))
}

/// Stream id reserved for the wired super-vertex.
pub const WIRED_STREAM: u64 = u64::MAX;
