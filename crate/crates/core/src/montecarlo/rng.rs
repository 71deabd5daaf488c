use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a random stream. Each purpose of each replicate draws from its
/// own ChaCha8 stream, so changing how many numbers one purpose consumes never
/// shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Mean = 0,
    Classes = 1,
    Noise = 2,
    Labeler = 3,
    Channel = 4,
}

const STREAMS_PER_REPLICATE: u64 = 8;

/// ChaCha8 keyed by `seed`, on the stream of (`replicate`, `purpose`).
pub fn stream_rng(seed: u64, replicate: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate * STREAMS_PER_REPLICATE + purpose as u64);
    rng
}
