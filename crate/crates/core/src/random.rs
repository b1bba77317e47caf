//! Random rings elements, matrices and block operations for randomized
//! checks and benchmarks.

use rand::Rng;

use crate::matrix::{BlockOp, BlockPartition, RingMatrix};
use crate::ring::{ChainRing, PolySpec};

pub fn random_matrix<R: Rng + ?Sized>(ring: &ChainRing, rows: usize, cols: usize, rng: &mut R) -> RingMatrix {
    let m = ring.m();
    let data = (0..rows * cols * ring.degree()).map(|_| rng.random_range(0..m)).collect();
    RingMatrix::from_raw(ring, rows, cols, data).expect("shape matches")
}

/// A uniformly random invertible matrix, by rejection.
pub fn random_invertible<R: Rng + ?Sized>(ring: &ChainRing, n: usize, rng: &mut R) -> RingMatrix {
    loop {
        let g = random_matrix(ring, n, n, rng);
        if g.is_invertible() {
            return g;
        }
    }
}

/// Matrices with a skewed valuation profile: each entry is `p^v u` with
/// `v` uniform in `[0, k]`, so cokernels are rarely trivial.
pub fn random_structured_matrix<R: Rng + ?Sized>(ring: &ChainRing, rows: usize, cols: usize, rng: &mut R) -> RingMatrix {
    let m = ring.m();
    let d = ring.degree();
    let mut data = Vec::with_capacity(rows * cols * d);
    for _ in 0..rows * cols {
        let v = rng.random_range(0..=ring.k());
        let scale = if v == ring.k() { 0 } else { ring.pow_p(v) };
        for _ in 0..d {
            let c = rng.random_range(0..m);
            data.push(((c as u128 * scale as u128) % m as u128) as u64);
        }
    }
    RingMatrix::from_raw(ring, rows, cols, data).expect("shape matches")
}

/// A random composition of `n` into at most `max_blocks` positive parts.
pub fn random_partition<R: Rng + ?Sized>(n: usize, max_blocks: usize, rng: &mut R) -> BlockPartition {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let size = if sizes.len() + 1 >= max_blocks { left } else { rng.random_range(1..=left) };
        sizes.push(size);
        left -= size;
    }
    BlockPartition::new(sizes).expect("positive sizes")
}

/// A random elementary block operation. `rows` selects the shape
/// convention for `AddMultiple` factors.
pub fn random_block_op<R: Rng + ?Sized>(ring: &ChainRing, part: &BlockPartition, rows: bool, rng: &mut R) -> BlockOp {
    let s = part.sizes().len();
    let kind = if s == 1 { 1 } else { rng.random_range(0..3) };
    match kind {
        0 => {
            let i = rng.random_range(0..s);
            let j = rng.random_range(0..s);
            BlockOp::Swap(i, j)
        }
        1 => {
            let i = rng.random_range(0..s);
            BlockOp::Scale(i, random_invertible(ring, part.sizes()[i], rng))
        }
        _ => {
            let target = rng.random_range(0..s);
            let source = (target + rng.random_range(1..s)) % s;
            let (nt, ns) = (part.sizes()[target], part.sizes()[source]);
            let factor = if rows {
                random_matrix(ring, nt, ns, rng)
            } else {
                random_matrix(ring, ns, nt, rng)
            };
            BlockOp::AddMultiple { target, source, factor }
        }
    }
}

/// A monic polynomial of degree `d`, irreducible mod `p`, with coefficients
/// lifted at random to `[0, p^lift)`.
pub fn random_irreducible<R: Rng + ?Sized>(p: u64, d: usize, lift: u32, rng: &mut R) -> PolySpec {
    let bound = p.pow(lift.max(1)) as i64;
    loop {
        let mut coeffs: Vec<i64> = (0..d).map(|_| rng.random_range(0..bound)).collect();
        coeffs.push(1);
        if let Ok(poly) = PolySpec::new(&coeffs, p) {
            return poly;
        }
    }
}
