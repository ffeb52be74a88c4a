//! Seeded random streams. Each consumer draws from its own ChaCha stream so
//! that, for one seed, the layout, the data split and the model init never
//! share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const TOPOLOGY: u64 = 0;
pub(crate) const PARTITION: u64 = 1;
pub(crate) const MODEL_INIT: u64 = 2;
pub(crate) const SYNTHETIC: u64 = 3;

pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
