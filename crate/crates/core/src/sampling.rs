//! Seeded, chunked sampling helpers.
//!
//! Every scan splits its sample range into fixed-size chunks; chunk `c` draws
//! from a ChaCha stream keyed by `(seed, c)`. Results therefore do not depend
//! on the number of worker threads, and merging happens in chunk order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::ops::Range;

/// Number of samples handled by one chunk.
pub const CHUNK_SIZE: usize = 2048;

/// Deterministic generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `f` over `total` samples split into chunks, in parallel, and returns
/// the per-chunk results in chunk order.
pub fn map_chunks<T, F>(total: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>, &mut ChaCha8Rng) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(total);
            let mut rng = chunk_rng(seed, c as u64);
            f(start..end, &mut rng)
        })
        .collect()
}
