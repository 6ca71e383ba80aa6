//! Keyed random streams.
//!
//! Every random quantity in a run is drawn from a ChaCha8 stream selected by
//! `(master seed, key)`, where the key names the object the randomness
//! belongs to: a vertex, an unordered pair of vertices, or a replica index.
//! Results therefore do not depend on the order in which objects are
//! explored.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROOT_KEY: u64 = 0x6a09_e667_f3bc_c909;
const REVEAL_TAG: u64 = 0x1f83_d9ab_fb41_bd6b;
const PAIR_TAG: u64 = 0x5be0_cd19_137e_2179;
const REPLICA_TAG: u64 = 0x9b05_688c_2b3e_6c1f;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key of the empty word.
#[inline]
pub fn root_key() -> u64 {
    ROOT_KEY
}

/// Key of `w · a_g` given the key of the reduced word `w` (with `g` not
/// cancelling against the last letter).
#[inline]
pub fn extend_key(key: u64, g: u8) -> u64 {
    mix(key ^ (g as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Key of a reduced word.
pub fn word_key(word: &[u8]) -> u64 {
    word.iter().fold(ROOT_KEY, |k, &g| extend_key(k, g))
}

/// Symmetric key of an unordered pair of vertex keys.
#[inline]
pub fn pair_key(a: u64, b: u64) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    mix(mix(lo ^ PAIR_TAG).wrapping_add(hi))
}

#[derive(Debug, Clone)]
pub struct Streams {
    base: ChaCha8Rng,
}

impl Streams {
    pub fn new(master_seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(master_seed),
        }
    }

    pub fn stream(&self, key: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(key);
        rng.set_word_pos(0);
        rng
    }

    /// Initial occupancy of the vertex with word key `key` under Bernoulli(ρ).
    pub fn bernoulli(&self, key: u64, rho: f64) -> bool {
        self.stream(mix(key ^ REVEAL_TAG)).random::<f64>() < rho
    }

    /// Clock stream of the unordered pair with the given pair key.
    pub fn pair_stream(&self, pair: u64) -> ChaCha8Rng {
        self.stream(pair)
    }

    /// Seed for replica `index`.
    pub fn replica_seed(&self, index: u64) -> u64 {
        self.stream(mix(index ^ REPLICA_TAG)).next_u64()
    }
}

/// Seed of replica `index` under master seed `master`.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    Streams::new(master).replica_seed(index)
}
