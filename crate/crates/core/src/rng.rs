//! Keyed, replayable random streams.
//!
//! Every random draw in a simulation comes from a stream keyed by
//! `(master_seed, round, client, purpose)`. Two runs that share a key consume
//! exactly the same numbers no matter what else differs between them, which is
//! what makes counterfactual (shadow) runs line up draw for draw.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The concrete generator handed to every stochastic operation.
pub type RngStream = ChaCha12Rng;

/// Client id used for server-side streams (sampling, schedule, central noise).
pub const SERVER: usize = usize::MAX;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Batching,
    Noise,
    Sampling,
    Schedule,
    Init,
    Data,
    Partition,
    Malicious,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Batching => 0x6261_7463_6869_6e67,
            Purpose::Noise => 0x6e6f_6973_6500_0001,
            Purpose::Sampling => 0x7361_6d70_6c69_6e67,
            Purpose::Schedule => 0x7363_6865_6475_6c65,
            Purpose::Init => 0x696e_6974_0000_0002,
            Purpose::Data => 0x6461_7461_0000_0003,
            Purpose::Partition => 0x7061_7274_6974_696f,
            Purpose::Malicious => 0x6d61_6c69_6369_6f75,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn absorb(state: u64, word: u64) -> u64 {
    mix64(state ^ mix64(word))
}

/// Derive the stream for one `(seed, round, client, purpose)` key.
pub fn derive_rng(master_seed: u64, round: usize, client: usize, purpose: Purpose) -> RngStream {
    let mut seed = [0u8; 32];
    let mut h = absorb(mix64(master_seed), round as u64);
    h = absorb(h, client as u64);
    h = absorb(h, purpose.tag());
    for chunk in seed.chunks_exact_mut(8) {
        h = mix64(h);
        chunk.copy_from_slice(&h.to_le_bytes());
    }
    RngStream::from_seed(seed)
}

/// Order-sensitive digest of a sequence of index lists, used for draw-log comparisons.
pub fn digest_batches(batches: &[Vec<usize>]) -> u64 {
    let mut h = 0x243f_6a88_85a3_08d3u64;
    for batch in batches {
        h = absorb(h, batch.len() as u64);
        for &i in batch {
            h = absorb(h, i as u64);
        }
    }
    h
}
