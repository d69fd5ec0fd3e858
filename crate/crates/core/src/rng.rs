//! Random streams.
//!
//! Replication `r` of a run seeded with `master_seed` draws from ChaCha8 keyed
//! by `master_seed` on stream `r`. ChaCha is counter based, so each stream is
//! addressable without generating the ones before it and a replication's
//! numbers do not depend on which thread runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn replication_stream(master_seed: u64, replication: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}
