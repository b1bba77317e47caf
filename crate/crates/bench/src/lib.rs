//! Fixtures shared by the benchmarks in `benches/`.

use cokernels::random::random_matrix;
use cokernels::{ChainRing, RingMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` uniform `n x n` matrices over `ring`, reproducible from `seed`.
pub fn random_matrices(ring: &ChainRing, n: usize, count: usize, seed: u64) -> Vec<RingMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_matrix(ring, n, n, &mut rng)).collect()
}
