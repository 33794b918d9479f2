//! Seed-derivable random streams.
//!
//! A stream is identified by `(master seed, alpha, purpose)`; distinct
//! identities give independent ChaCha streams, so the guess of `alpha` and
//! the rounding coins never share draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    Guess,
    Rounding,
    Bucket,
    Order,
    Sampling,
    Trial,
    Generate,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Guess => 1,
            Purpose::Rounding => 2,
            Purpose::Bucket => 3,
            Purpose::Order => 4,
            Purpose::Sampling => 5,
            Purpose::Trial => 6,
            Purpose::Generate => 7,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for `(master, key, purpose)`. `key` is alpha for the rounding
/// stream and a trial index or zero elsewhere.
pub fn stream(master: u64, key: u128, purpose: Purpose) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let lo = key as u64;
    let hi = (key >> 64) as u64;
    rng.set_stream(splitmix(splitmix(lo ^ purpose.tag().rotate_left(56)) ^ hi));
    rng
}

/// Derives a child seed, e.g. the seed of trial `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix(master ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}
