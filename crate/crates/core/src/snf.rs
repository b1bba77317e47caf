//! Smith normal form over chain rings and the cokernel computations built
//! on it.
//!
//! Over `Z/p^k` or `(Z/p^k)[t]/(P)` every nonzero element is a unit times a
//! power of `p`, so the diagonal can always be normalized to `p^(d_i)`. An
//! exponent `d_i = k` stands for a zero diagonal entry: the cokernel has a
//! summand whose true exponent is at least `k` and cannot be resolved at
//! this precision ("saturated").

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RingMatrix;
use crate::module::ModuleType;
use crate::ring::{ChainRing, PolySpec, SmallTables};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// Nondecreasing exponents, one per diagonal position.
    pub exponents: Vec<u32>,
    /// Modulus exponent of the ring the form was computed over.
    pub k: u32,
    /// `left * X * right` is the diagonal `p^(d_i)` when present.
    pub left: Option<RingMatrix>,
    pub right: Option<RingMatrix>,
}

impl SnfResult {
    pub fn saturated(&self) -> bool {
        self.exponents.contains(&self.k)
    }

    /// The `rows x cols` diagonal matrix `diag(p^(d_i))` over `ring`.
    pub fn diagonal(&self, ring: &ChainRing, rows: usize, cols: usize) -> RingMatrix {
        let mut values = vec![0i64; rows * cols];
        for (i, &e) in self.exponents.iter().enumerate() {
            if e < ring.k() {
                values[i * cols + i] = ring.pow_p(e) as i64;
            }
        }
        RingMatrix::from_ints(ring, rows, cols, &values).expect("shape matches")
    }
}

/// Pivot: the first entry of minimal valuation in row-major order, within
/// rows and columns `t..`.
#[inline]
fn find_pivot(ring: &ChainRing, rows: usize, cols: usize, a: &[u64], t: usize) -> (u32, usize, usize) {
    let d = ring.degree();
    let mut best = (ring.k(), t, t);
    for i in t..rows {
        for j in t..cols {
            let v = ring.valuation_of(&a[(i * cols + j) * d..]);
            if v < best.0 {
                best = (v, i, j);
                if v == 0 {
                    return best;
                }
            }
        }
    }
    best
}

/// Exponents only; destroys `a`. `out` receives `min(rows, cols)` values.
///
/// After the rows below the pivot are cleared, clearing the pivot row with
/// column operations would not touch the remaining submatrix, so that half
/// is skipped.
pub(crate) fn exponents_in_place(ring: &ChainRing, rows: usize, cols: usize, a: &mut [u64], out: &mut [u32]) {
    if ring.degree() == 1 {
        scalar_exponents(ring, rows, cols, a, out);
    } else {
        extension_exponents(ring, rows, cols, a, out);
    }
}

/// Largest square size with a dedicated fixed-size kernel.
const FIXED_MAX: usize = 8;

/// Fixed-size elimination over a small `Z/p^k`, entries as residues.
#[inline(always)]
fn fixed_exponents<const N: usize>(s: &SmallTables<'_>, a: &mut [[u64; N]; N], out: &mut [u32]) {
    for t in 0..N {
        let (mut best, mut pi, mut pj) = (s.k, t, t);
        'search: for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = s.valuations[x as usize] as u32;
                if v < best {
                    (best, pi, pj) = (v, i, j);
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        if best == s.k {
            out[t..N].fill(s.k);
            return;
        }
        out[t] = best;
        a.swap(pi, t);
        if pj != t {
            for row in a.iter_mut().skip(t) {
                row.swap(pj, t);
            }
        }
        let uinv = s.inverses[s.div_exact(a[t][t], best) as usize];
        let pivot = a[t];
        for row in a.iter_mut().skip(t + 1) {
            let x = row[t];
            if x == 0 {
                continue;
            }
            let c = s.mul(s.div_exact(x, best), uinv);
            for j in t + 1..N {
                row[j] = s.sub(row[j], s.mul(c, pivot[j]));
            }
        }
    }
}

/// Loads `a - shift I` into a fixed array and runs the kernel.
#[inline(always)]
fn fixed_shifted<const N: usize>(s: &SmallTables<'_>, a: &[u64], shift: u64, out: &mut [u32]) {
    let mut m = [[0u64; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row.copy_from_slice(&a[i * N..(i + 1) * N]);
        row[i] = s.sub(row[i], shift);
    }
    fixed_exponents::<N>(s, &mut m, out);
}

/// Exponents of `a - shift I` for square `a` when a fixed kernel applies;
/// `false` when it does not.
#[inline]
fn try_fixed(s: &SmallTables<'_>, n: usize, a: &[u64], shift: u64, out: &mut [u32]) -> bool {
    match n {
        1 => fixed_shifted::<1>(s, a, shift, out),
        2 => fixed_shifted::<2>(s, a, shift, out),
        3 => fixed_shifted::<3>(s, a, shift, out),
        4 => fixed_shifted::<4>(s, a, shift, out),
        5 => fixed_shifted::<5>(s, a, shift, out),
        6 => fixed_shifted::<6>(s, a, shift, out),
        7 => fixed_shifted::<7>(s, a, shift, out),
        8 => fixed_shifted::<8>(s, a, shift, out),
        _ => return false,
    }
    debug_assert!(n <= FIXED_MAX);
    true
}

fn scalar_exponents(ring: &ChainRing, rows: usize, cols: usize, a: &mut [u64], out: &mut [u32]) {
    if rows == cols {
        if let Some(tables) = ring.small_tables() {
            if try_fixed(&tables, rows, a, 0, out) {
                return;
            }
        }
    }
    let k = ring.k();
    let m = ring.m();
    let r = rows.min(cols);
    for t in 0..r {
        let mut best = (k, t, t);
        'search: for i in t..rows {
            for j in t..cols {
                let x = a[i * cols + j];
                if x != 0 {
                    let v = ring.scalar_valuation(x);
                    if v < best.0 {
                        best = (v, i, j);
                        if v == 0 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let (v, pi, pj) = best;
        if v == k {
            out[t..r].fill(k);
            return;
        }
        out[t] = v;
        if pi != t {
            for j in t..cols {
                a.swap(pi * cols + j, t * cols + j);
            }
        }
        if pj != t {
            for i in t..rows {
                a.swap(i * cols + pj, i * cols + t);
            }
        }
        let pv = ring.pow_p(v);
        let uinv = ring.scalar_inverse(a[t * cols + t] / pv);
        for i in t + 1..rows {
            let x = a[i * cols + t];
            if x == 0 {
                continue;
            }
            let c = ring.mulmod(x / pv, uinv);
            for j in t + 1..cols {
                let s = ring.mulmod(c, a[t * cols + j]);
                let e = &mut a[i * cols + j];
                *e = if *e >= s { *e - s } else { *e + m - s };
            }
        }
    }
}

fn extension_exponents(ring: &ChainRing, rows: usize, cols: usize, a: &mut [u64], out: &mut [u32]) {
    let d = ring.degree();
    let k = ring.k();
    let r = rows.min(cols);
    let mut unit = [0u64; crate::ring::MAX_DEGREE];
    let mut uinv = [0u64; crate::ring::MAX_DEGREE];
    let mut quot = [0u64; crate::ring::MAX_DEGREE];
    let mut c = [0u64; crate::ring::MAX_DEGREE];
    let mut src = [0u64; crate::ring::MAX_DEGREE];
    for t in 0..r {
        let (v, pi, pj) = find_pivot(ring, rows, cols, a, t);
        if v == k {
            out[t..r].fill(k);
            return;
        }
        out[t] = v;
        if pi != t {
            for j in t..cols {
                for l in 0..d {
                    a.swap((pi * cols + j) * d + l, (t * cols + j) * d + l);
                }
            }
        }
        if pj != t {
            for i in t..rows {
                for l in 0..d {
                    a.swap((i * cols + pj) * d + l, (i * cols + t) * d + l);
                }
            }
        }
        ring.div_pow_p_into(&a[(t * cols + t) * d..], v, &mut unit[..d]);
        ring.inverse_into(&unit[..d], &mut uinv[..d]).expect("pivot quotient is a unit");
        for i in t + 1..rows {
            let at = (i * cols + t) * d;
            if a[at..at + d].iter().all(|&x| x == 0) {
                continue;
            }
            ring.div_pow_p_into(&a[at..], v, &mut quot[..d]);
            ring.mul_into(&quot[..d], &uinv[..d], &mut c[..d]);
            for j in t + 1..cols {
                src[..d].copy_from_slice(&a[(t * cols + j) * d..(t * cols + j + 1) * d]);
                let at = (i * cols + j) * d;
                ring.sub_mul_assign(&mut a[at..at + d], &c[..d], &src[..d]);
            }
        }
    }
}

/// Smith normal form of any matrix over a chain ring.
///
/// With `with_transforms`, also returns invertible `left`, `right` such that
/// `left * X * right` is exactly the diagonal of `p^(d_i)`.
pub fn smith_normal_form(x: &RingMatrix, with_transforms: bool) -> SnfResult {
    let ring = x.ring();
    let (rows, cols) = (x.rows(), x.cols());
    let mut exponents = vec![0; rows.min(cols)];
    if !with_transforms {
        let mut a = x.raw().to_vec();
        exponents_in_place(ring, rows, cols, &mut a, &mut exponents);
        return SnfResult {
            exponents,
            k: ring.k(),
            left: None,
            right: None,
        };
    }
    let (left, right) = snf_with_transforms(x, &mut exponents);
    SnfResult {
        exponents,
        k: ring.k(),
        left: Some(left),
        right: Some(right),
    }
}

/// Full two-sided elimination, tracking `left` and `right`.
fn snf_with_transforms(x: &RingMatrix, exponents: &mut [u32]) -> (RingMatrix, RingMatrix) {
    let ring = x.ring();
    let d = ring.degree();
    let (rows, cols) = (x.rows(), x.cols());
    let mut a = x.raw().to_vec();
    let mut left = RingMatrix::identity(ring, rows).raw().to_vec();
    let mut right = RingMatrix::identity(ring, cols).raw().to_vec();
    let k = ring.k();

    fn swap_rows(buf: &mut [u64], width: usize, d: usize, r1: usize, r2: usize) {
        if r1 != r2 {
            for c in 0..width * d {
                buf.swap(r1 * width * d + c, r2 * width * d + c);
            }
        }
    }
    fn swap_cols(buf: &mut [u64], height: usize, width: usize, d: usize, c1: usize, c2: usize) {
        if c1 != c2 {
            for r in 0..height {
                for l in 0..d {
                    buf.swap((r * width + c1) * d + l, (r * width + c2) * d + l);
                }
            }
        }
    }
    // row_dst -= c * row_src over a buffer of the given width.
    fn row_axpy(ring: &ChainRing, buf: &mut [u64], width: usize, dst: usize, src: usize, c: &[u64]) {
        let d = ring.degree();
        for j in 0..width {
            let s = buf[(src * width + j) * d..(src * width + j + 1) * d].to_vec();
            ring.sub_mul_assign(&mut buf[(dst * width + j) * d..(dst * width + j + 1) * d], c, &s);
        }
    }
    fn col_axpy(ring: &ChainRing, buf: &mut [u64], height: usize, width: usize, dst: usize, src: usize, c: &[u64]) {
        let d = ring.degree();
        for i in 0..height {
            let s = buf[(i * width + src) * d..(i * width + src + 1) * d].to_vec();
            ring.sub_mul_assign(&mut buf[(i * width + dst) * d..(i * width + dst + 1) * d], c, &s);
        }
    }
    fn row_scale(ring: &ChainRing, buf: &mut [u64], width: usize, row: usize, c: &[u64]) {
        let d = ring.degree();
        let mut out = vec![0; d];
        for j in 0..width {
            let at = (row * width + j) * d;
            ring.mul_into(c, &buf[at..at + d], &mut out);
            buf[at..at + d].copy_from_slice(&out);
        }
    }

    let r = rows.min(cols);
    let mut unit = vec![0; d];
    let mut uinv = vec![0; d];
    let mut c = vec![0; d];
    for t in 0..r {
        let (v, pi, pj) = find_pivot(ring, rows, cols, &a, t);
        if v == k {
            exponents[t..r].fill(k);
            break;
        }
        exponents[t] = v;
        swap_rows(&mut a, cols, d, pi, t);
        swap_rows(&mut left, rows, d, pi, t);
        swap_cols(&mut a, rows, cols, d, pj, t);
        swap_cols(&mut right, cols, cols, d, pj, t);

        ring.div_pow_p_into(&a[(t * cols + t) * d..], v, &mut unit);
        ring.inverse_into(&unit, &mut uinv).expect("pivot quotient is a unit");
        row_scale(ring, &mut a, cols, t, &uinv);
        row_scale(ring, &mut left, rows, t, &uinv);

        for i in t + 1..rows {
            let at = (i * cols + t) * d;
            if a[at..at + d].iter().all(|&x| x == 0) {
                continue;
            }
            ring.div_pow_p_into(&a[at..], v, &mut c);
            row_axpy(ring, &mut a, cols, i, t, &c);
            row_axpy(ring, &mut left, rows, i, t, &c);
        }
        for j in t + 1..cols {
            let at = (t * cols + j) * d;
            if a[at..at + d].iter().all(|&x| x == 0) {
                continue;
            }
            ring.div_pow_p_into(&a[at..], v, &mut c);
            col_axpy(ring, &mut a, rows, cols, j, t, &c);
            col_axpy(ring, &mut right, cols, cols, j, t, &c);
        }
    }
    (
        RingMatrix::from_raw(ring, rows, rows, left).expect("shape"),
        RingMatrix::from_raw(ring, cols, cols, right).expect("shape"),
    )
}

/// Cokernel of a square matrix: a module class, or saturated when some
/// invariant factor is zero at this precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CokernelClass {
    Module { module: ModuleType },
    Saturated,
}

impl CokernelClass {
    pub fn from_exponents(exponents: &[u32], k: u32, residue_degree: u32) -> Self {
        if exponents.iter().any(|&e| e >= k) {
            CokernelClass::Saturated
        } else {
            CokernelClass::Module {
                module: ModuleType::from_invariant_exponents(exponents, residue_degree),
            }
        }
    }

    pub fn module(&self) -> Option<&ModuleType> {
        match self {
            CokernelClass::Module { module } => Some(module),
            CokernelClass::Saturated => None,
        }
    }
}

impl std::fmt::Display for CokernelClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CokernelClass::Module { module } => write!(f, "{module}"),
            CokernelClass::Saturated => f.write_str("overflow"),
        }
    }
}

fn require_square(x: &RingMatrix) -> Result<()> {
    if x.is_square() {
        Ok(())
    } else {
        Err(Error::Shape(format!("cokernel needs a square matrix, got {}x{}", x.rows(), x.cols())))
    }
}

pub fn cokernel_class(x: &RingMatrix) -> Result<CokernelClass> {
    require_square(x)?;
    let snf = smith_normal_form(x, false);
    Ok(CokernelClass::from_exponents(&snf.exponents, snf.k, x.ring().degree() as u32))
}

/// Cokernel class of a square matrix; fails with `PrecisionSaturated` when
/// an exponent reaches `k`.
pub fn cokernel_type(x: &RingMatrix) -> Result<ModuleType> {
    require_square(x)?;
    let snf = smith_normal_form(x, false);
    if snf.saturated() {
        return Err(Error::PrecisionSaturated {
            exponents: snf.exponents,
            k: snf.k,
        });
    }
    Ok(ModuleType::from_invariant_exponents(&snf.exponents, x.ring().degree() as u32))
}

/// Largest matrix accepted by [`minor_gcd_valuations`].
pub const MINOR_MAX_DIM: usize = 6;

/// For each `i`, the minimum `p`-valuation over all `i x i` minors of the
/// canonical lift of `X`, capped at `k i`.
///
/// Each minor is expanded by cofactors modulo `p^(k i)`, which determines
/// its valuation up to that cap.
pub fn minor_gcd_valuations(x: &RingMatrix) -> Result<Vec<u32>> {
    require_square(x)?;
    let n = x.rows();
    if n > MINOR_MAX_DIM {
        return Err(Error::Unsupported(format!("minors of a {n}x{n} matrix")));
    }
    let ring = x.ring();
    let d = ring.degree();
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let wide = ring.with_exponent(ring.k() * i as u32)?;
        let lifted = x.lift_canonical(wide.k())?;
        let mut best = wide.k();
        for rows in subsets(n, i) {
            for cols in subsets(n, i) {
                let det = cofactor_det(&wide, &lifted, &rows, &cols);
                best = best.min(wide.valuation_of(&det[..d]));
            }
            if best == 0 {
                break;
            }
        }
        out.push(best);
    }
    Ok(out)
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::new(), &mut out);
    out
}

fn cofactor_det(ring: &ChainRing, x: &RingMatrix, rows: &[usize], cols: &[usize]) -> Vec<u64> {
    let d = ring.degree();
    if rows.len() == 1 {
        return x.entry(rows[0], cols[0]).to_vec();
    }
    let mut acc = vec![0; d];
    let mut term = vec![0; d];
    let sub_rows = &rows[1..];
    for (idx, &c) in cols.iter().enumerate() {
        let entry = x.entry(rows[0], c);
        if entry.iter().all(|&e| e == 0) {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
        let minor = cofactor_det(ring, x, sub_rows, &sub_cols);
        ring.mul_into(entry, &minor, &mut term);
        let prev = acc.clone();
        if idx % 2 == 0 {
            ring.add_into(&prev, &term, &mut acc);
        } else {
            ring.sub_into(&prev, &term, &mut acc);
        }
    }
    acc
}

/// `X - t I` over `R = (Z/p^m)[t]/(P)`, for `X` over `Z/p^m`.
pub fn lee_matrix(x: &RingMatrix, poly: &PolySpec) -> Result<RingMatrix> {
    require_square(x)?;
    if x.ring().poly().is_some() {
        return Err(Error::RingMismatch("X must be over Z/p^m".into()));
    }
    if poly.p() != x.ring().p() {
        return Err(Error::RingMismatch("polynomial over a different prime".into()));
    }
    let ring = ChainRing::extension(poly, x.ring().k())?;
    let t = ring.t_bar().expect("extension ring");
    let n = x.rows();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let c = ring.from_int(x.entry(i, j)[0] as i64);
            entries.push(if i == j { c.sub(&t)? } else { c });
        }
    }
    RingMatrix::from_elements(&ring, n, n, &entries)
}

/// `cok(P(X))` with its module structure over `R = (Z/p^m)[t]/(P)`,
/// computed as the cokernel of `X - t I` over `R`.
pub fn cokernel_via_lee(x: &RingMatrix, poly: &PolySpec) -> Result<ModuleType> {
    cokernel_type(&lee_matrix(x, poly)?)
}

/// Raw invariant exponents of `X - t I` over `R`, saturated ones included.
pub fn cokernel_via_lee_exponents(x: &RingMatrix, poly: &PolySpec) -> Result<Vec<u32>> {
    Ok(smith_normal_form(&lee_matrix(x, poly)?, false).exponents)
}

pub fn cokernel_class_via_lee(x: &RingMatrix, poly: &PolySpec) -> Result<CokernelClass> {
    cokernel_class(&lee_matrix(x, poly)?)
}

/// Reusable scratch for repeated `cok(P(X))` classification of `n x n`
/// matrices over `Z/p^m`, through `X - t I` over `R`.
pub(crate) struct LeeKernel {
    ring: ChainRing,
    n: usize,
    /// `t` in `R`.
    t: Vec<u64>,
    scratch: Vec<u64>,
}

impl LeeKernel {
    pub(crate) fn new(poly: &PolySpec, m: u32, n: usize) -> Result<Self> {
        let ring = ChainRing::extension(poly, m)?;
        ring.prepare_inverses();
        let t = ring.t_bar().expect("extension ring").coords().to_vec();
        let d = ring.degree();
        Ok(LeeKernel {
            ring,
            n,
            t,
            scratch: vec![0; n * n * d],
        })
    }

    /// Invariant exponents of `X - t I` for `X` given row-major as residues
    /// mod `p^m`.
    #[inline]
    pub(crate) fn exponents(&mut self, x: &[u64], out: &mut [u32]) {
        let d = self.ring.degree();
        let n = self.n;
        if d == 1 {
            if let Some(tables) = self.ring.small_tables() {
                if try_fixed(&tables, n, x, self.t[0], out) {
                    return;
                }
            }
        }
        self.scratch.fill(0);
        for (idx, &v) in x.iter().enumerate() {
            self.scratch[idx * d] = v;
        }
        let mut cur = [0u64; crate::ring::MAX_DEGREE];
        for i in 0..n {
            let at = (i * n + i) * d;
            cur[..d].copy_from_slice(&self.scratch[at..at + d]);
            self.ring.sub_into(&cur[..d], &self.t, &mut self.scratch[at..at + d]);
        }
        exponents_in_place(&self.ring, n, n, &mut self.scratch, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64, k: u32) -> ChainRing {
        ChainRing::integers(p, k).unwrap()
    }

    fn m(ring: &ChainRing, n: usize, v: &[i64]) -> RingMatrix {
        RingMatrix::from_ints(ring, n, n, v).unwrap()
    }

    #[test]
    fn worked_examples() {
        let z8 = z(2, 3);
        assert_eq!(smith_normal_form(&RingMatrix::zeros(&z8, 2, 2), false).exponents, vec![3, 3]);
        assert_eq!(smith_normal_form(&m(&z8, 2, &[2, 4, 6, 4]), false).exponents, vec![1, 3]);
        assert_eq!(smith_normal_form(&RingMatrix::identity(&z8, 3), false).exponents, vec![0, 0, 0]);
    }

    #[test]
    fn fixed_kernel_matches_generic_elimination() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for ring in [z(2, 5), z(3, 4), z(7, 3), z(2, 16), z(251, 2)] {
            assert!(ring.small_tables().is_some(), "{ring}");
            for n in 1..=FIXED_MAX + 1 {
                for case in 0..40 {
                    let x = if case % 2 == 0 {
                        crate::random::random_matrix(&ring, n, n, &mut rng)
                    } else {
                        crate::random::random_structured_matrix(&ring, n, n, &mut rng)
                    };
                    let fast = smith_normal_form(&x, false).exponents;
                    let mut a = x.raw().to_vec();
                    let mut generic = vec![0; n];
                    extension_exponents(&ring, n, n, &mut a, &mut generic);
                    assert_eq!(fast, generic, "{ring} X={}", x.to_text());
                }
            }
        }
    }

    #[test]
    fn transforms_diagonalize() {
        let r = ChainRing::extension(&PolySpec::new(&[1, 1, 1], 2).unwrap(), 2).unwrap();
        let x = RingMatrix::parse(&r, "2+2*t,2,t;2*t,0,2;1+t,2,3").unwrap();
        let snf = smith_normal_form(&x, true);
        let (l, rt) = (snf.left.clone().unwrap(), snf.right.clone().unwrap());
        assert!(l.is_invertible() && rt.is_invertible());
        assert_eq!(l.mul(&x).unwrap().mul(&rt).unwrap(), snf.diagonal(&r, 3, 3));
        assert_eq!(snf.exponents, smith_normal_form(&x, false).exponents);
    }

    #[test]
    fn cokernel_readout() {
        let z4 = z(2, 2);
        assert_eq!(cokernel_type(&m(&z4, 1, &[2])).unwrap(), ModuleType::parse("1^1", 1).unwrap());
        assert!(matches!(
            cokernel_type(&m(&z4, 1, &[0])),
            Err(Error::PrecisionSaturated { k: 2, .. })
        ));
        let z8 = z(2, 3);
        let x = m(&z8, 3, &[2, 0, 0, 0, 2, 0, 0, 0, 4]);
        assert_eq!(cokernel_type(&x).unwrap(), ModuleType::parse("2^1,1^2", 1).unwrap());
        assert!(cokernel_type(&RingMatrix::zeros(&z8, 2, 3)).is_err());
    }

    #[test]
    fn minor_valuations() {
        let z8 = z(2, 3);
        assert_eq!(minor_gcd_valuations(&m(&z8, 2, &[2, 4, 6, 4])).unwrap(), vec![1, 4]);
        assert_eq!(minor_gcd_valuations(&RingMatrix::identity(&z8, 3)).unwrap(), vec![0, 0, 0]);
        assert_eq!(minor_gcd_valuations(&RingMatrix::zeros(&z8, 3, 3)).unwrap(), vec![3, 6, 9]);
        assert!(minor_gcd_valuations(&RingMatrix::identity(&z(2, 1), 7)).is_err());
    }

    #[test]
    fn lee_unit_evaluation() {
        let z4 = z(2, 2);
        let poly = PolySpec::new(&[1, 1, 1], 2).unwrap();
        assert!(cokernel_via_lee(&m(&z4, 1, &[1]), &poly).unwrap().is_trivial());
    }

    #[test]
    fn lee_companion_lift() {
        let z4 = z(2, 2);
        let poly = PolySpec::new(&[1, 1, 1], 2).unwrap();
        let x = m(&z4, 2, &[0, 1, 1, 1]);
        let over_r = cokernel_via_lee(&x, &poly).unwrap();
        assert_eq!(over_r, ModuleType::parse("1^1", 2).unwrap());
        let group = cokernel_type(&x.poly_eval(&poly).unwrap()).unwrap();
        assert_eq!(over_r.underlying_group(), group);
    }

    #[test]
    fn lee_kernel_matches_matrix_route() {
        let z8 = z(3, 2);
        let poly = PolySpec::new(&[1, 2, 0, 1], 3).unwrap();
        let x = m(&z8, 2, &[1, 4, 7, 2]);
        let mut kernel = LeeKernel::new(&poly, 2, 2).unwrap();
        let mut out = [0u32; 2];
        kernel.exponents(x.raw(), &mut out);
        let snf = smith_normal_form(&lee_matrix(&x, &poly).unwrap(), false);
        assert_eq!(out.to_vec(), snf.exponents);
    }
}
