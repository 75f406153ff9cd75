//! Seeded random streams.
//!
//! Every run, Monte Carlo repetition and grid cell draws from its own ChaCha8
//! stream: the 64-bit seed selects the key and the stream id selects one of
//! 2^64 independent, non-overlapping streams under that key. Same
//! `(seed, stream_id)` gives the same sequence on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
