//! Arithmetic in the chain rings `Z/p^k` and `(Z/p^k)[t]/(P(t))` with `P`
//! monic and irreducible modulo `p`.
//!
//! Both kinds of ring are handled by [`ChainRing`]; `Z/p^k` is the case with
//! no attached polynomial, and the residue field `F_q` is the case `k = 1`.
//! Elements are stored as `d` residues in `[0, p^k)`, the coordinates in the
//! basis `1, t, ..., t^(d-1)`. Because `p` stays prime in these rings, the
//! valuation of an element is the minimum valuation of its coordinates.
//!
//! Matrices keep their entries in flat `u64` buffers, so besides the
//! [`ChainRingElement`] value type this module exposes slice-level kernels
//! (`add_into`, `mul_into`, ...) that operate on one element's coordinates.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest extension degree a [`ChainRing`] accepts.
pub const MAX_DEGREE: usize = 8;

const MODULUS_LIMIT: u64 = 1 << 62;
const INVERSE_TABLE_LIMIT: u64 = 1 << 16;
/// Extension rings invert by Newton iteration this many times before
/// building the table.
const INVERSE_TABLE_WARMUP: u32 = 256;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The modulus `p^k` of the coefficient ring `Z/p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PrimePowerModulus {
    p: u64,
    k: u32,
    value: u64,
}

impl PrimePowerModulus {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::ZeroExponent);
        }
        match p.checked_pow(k) {
            Some(value) if value < MODULUS_LIMIT => Ok(PrimePowerModulus { p, k, value }),
            _ => Err(Error::ModulusTooLarge { p, k }),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `p^k` itself.
    pub fn value(&self) -> u64 {
        self.value
    }
}

/// A monic integer polynomial whose reduction modulo `p` is irreducible.
///
/// Only the non-leading coefficients `a_0, ..., a_{d-1}` are stored; the
/// leading coefficient is always 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PolySpec {
    p: u64,
    lower: Vec<i64>,
}

impl PolySpec {
    /// Builds `P` from the full coefficient list, lowest degree first and
    /// including the leading 1 (so `t^2 + t + 1` is `[1, 1, 1]`).
    pub fn new(coefficients: &[i64], p: u64) -> Result<Self> {
        if !check_irreducible(coefficients, p)? {
            return Err(Error::Reducible {
                poly: format_coefficients(coefficients),
                p,
            });
        }
        let d = coefficients.len() - 1;
        if d > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(d));
        }
        Ok(PolySpec {
            p,
            lower: coefficients[..d].to_vec(),
        })
    }

    /// Parses a comma-separated coefficient list such as `"1,1,1"`.
    pub fn parse(text: &str, p: u64) -> Result<Self> {
        PolySpec::new(&parse_coefficients(text)?, p)
    }

    /// The polynomial `t`.
    pub fn identity(p: u64) -> Result<Self> {
        PolySpec::new(&[0, 1], p)
    }

    /// The first monic irreducible of degree `d` modulo `p`,
    /// ordering candidates by `a_0 + a_1 p + ... + a_{d-1} p^(d-1)`.
    pub fn first_irreducible(p: u64, d: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if d == 0 || d > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(d));
        }
        let count = p.pow(d as u32);
        for index in 0..count {
            let mut coeffs = digits_base(index, p, d)
                .into_iter()
                .map(|c| c as i64)
                .collect::<Vec<_>>();
            coeffs.push(1);
            if check_irreducible(&coeffs, p)? {
                return PolySpec::new(&coeffs, p);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.lower.len()
    }

    /// Non-leading coefficients `a_0, ..., a_{d-1}`.
    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    /// Full coefficient list including the leading 1.
    pub fn coefficients(&self) -> Vec<i64> {
        let mut all = self.lower.clone();
        all.push(1);
        all
    }

    /// Non-leading coefficients reduced into `[0, modulus)`.
    pub fn reduced_lower(&self, modulus: u64) -> Vec<u64> {
        self.lower
            .iter()
            .map(|&c| c.rem_euclid(modulus as i64) as u64)
            .collect()
    }

    /// Same reduction modulo `p`.
    pub fn same_residue(&self, other: &PolySpec) -> bool {
        self.p == other.p && self.reduced_lower(self.p) == other.reduced_lower(other.p)
    }

    /// Residue field size `p^d`.
    pub fn residue_field_size(&self) -> u64 {
        self.p.pow(self.degree() as u32)
    }
}

impl fmt::Display for PolySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_coefficients(&self.coefficients()))
    }
}

pub fn parse_coefficients(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|c| {
            c.trim()
                .parse::<i64>()
                .map_err(|_| Error::parse(format!("bad polynomial coefficient {c:?}")))
        })
        .collect()
}

fn format_coefficients(coefficients: &[i64]) -> String {
    coefficients
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Whether the monic polynomial with the given coefficients (lowest degree
/// first, leading 1 included) is irreducible modulo `p`.
///
/// Trial division by every monic polynomial of degree at most `d/2`.
pub fn check_irreducible(coefficients: &[i64], p: u64) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if coefficients.len() < 2 || *coefficients.last().unwrap() != 1 {
        return Err(Error::NotMonic);
    }
    let poly: Vec<u64> = coefficients
        .iter()
        .map(|&c| c.rem_euclid(p as i64) as u64)
        .collect();
    let d = poly.len() - 1;
    for e in 1..=d / 2 {
        for index in 0..p.pow(e as u32) {
            let mut divisor = digits_base(index, p, e);
            divisor.push(1);
            if fp::rem(&poly, &divisor, p).is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Little-endian base-`base` digits of `value`, exactly `len` of them.
pub(crate) fn digits_base(mut value: u64, base: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(value % base);
        value /= base;
    }
    out
}

/// Polynomial arithmetic over `F_p`, coefficient vectors lowest degree first
/// with no trailing zeros (the zero polynomial is empty).
mod fp {
    pub fn inv(a: u64, p: u64) -> u64 {
        pow(a % p, p - 2, p)
    }

    fn pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
        let mut acc = 1 % p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        acc
    }

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    /// Quotient and remainder; `b` must be nonzero.
    pub fn divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut r = trim(a.to_vec());
        let b = trim(b.to_vec());
        let db = b.len() - 1;
        let lead_inv = inv(b[db], p);
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let mut q = vec![0; r.len() - db];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = r[r.len() - 1] * lead_inv % p;
            q[shift] = c;
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - c * bi % p) % p;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        divmod(a, b, p).1
    }

    fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(out)
    }

    fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let len = a.len().max(b.len());
        let out = (0..len)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    /// Inverse of `a` modulo the irreducible `m`, if `a` is nonzero mod `m`.
    pub fn inverse_mod(a: &[u64], m: &[u64], p: u64) -> Option<Vec<u64>> {
        let mut r0 = trim(m.to_vec());
        let mut r1 = rem(a, m, p);
        let mut s0: Vec<u64> = Vec::new();
        let mut s1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            let (q, r) = divmod(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&q, &s1, p), p);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if r0.len() != 1 {
            return None;
        }
        let c = inv(r0[0], p);
        Some(s0.iter().map(|&x| x * c % p).collect())
    }
}

struct RingData {
    modulus: PrimePowerModulus,
    poly: Option<PolySpec>,
    degree: usize,
    /// `(-a_j) mod p^k`, used to reduce `t^d`.
    neg_lower: Vec<u64>,
    /// `p^0, ..., p^k`.
    powers: Vec<u64>,
    /// Full monic `P` modulo `p`, for residue-field inverses.
    residue_poly: Vec<u64>,
    inverse_table: OnceLock<Option<Vec<u64>>>,
    inversions: AtomicU32,
    reducer: Reducer,
    /// Valuation of every residue below `p^k`, when that is small.
    valuations: Option<Vec<u8>>,
    /// `p^-v mod 2^64` for odd `p`, so exact division is one multiply.
    exact_inverse: Vec<u64>,
}

/// Borrowed lookup tables for the small-modulus scalar kernels.
#[derive(Clone, Copy)]
pub(crate) struct SmallTables<'a> {
    pub valuations: &'a [u8],
    pub inverses: &'a [u64],
    pub exact_inverse: &'a [u64],
    pub reducer: Reducer,
    pub m: u64,
    pub k: u32,
    pub two: bool,
}

impl SmallTables<'_> {
    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reducer.mul(a, b)
    }

    /// `x / p^v` for `x` divisible by `p^v`.
    #[inline(always)]
    pub fn div_exact(&self, x: u64, v: u32) -> u64 {
        if self.two {
            x >> v
        } else {
            x.wrapping_mul(self.exact_inverse[v as usize])
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }
}

/// How products are reduced modulo `m = p^k`.
#[derive(Clone, Copy)]
pub(crate) enum Reducer {
    /// `m` is a power of two.
    Mask(u64),
    /// `m < 2^16`, so products fit in 32 bits: Lemire's multiply-shift.
    Small { m: u64, magic: u64 },
    Wide(u64),
}

const SMALL_MODULUS: u64 = 1 << 16;

impl Reducer {
    #[inline(always)]
    pub(crate) fn mul(self, a: u64, b: u64) -> u64 {
        match self {
            Reducer::Mask(mask) => a.wrapping_mul(b) & mask,
            Reducer::Small { m, magic } => {
                let low = magic.wrapping_mul(a * b);
                ((low as u128 * m as u128) >> 64) as u64
            }
            Reducer::Wide(m) if m <= u32::MAX as u64 => a * b % m,
            Reducer::Wide(m) => ((a as u128 * b as u128) % m as u128) as u64,
        }
    }
}

fn reducer(m: u64) -> Reducer {
    if m.is_power_of_two() {
        Reducer::Mask(m - 1)
    } else if m < SMALL_MODULUS {
        Reducer::Small {
            m,
            magic: (u64::MAX / m).wrapping_add(1),
        }
    } else {
        Reducer::Wide(m)
    }
}

fn exact_inverses(p: u64, k: u32) -> Vec<u64> {
    if p == 2 {
        return Vec::new();
    }
    // Newton iteration for p^-1 mod 2^64 doubles the correct bits each step.
    let mut inv: u64 = 1;
    for _ in 0..6 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
    }
    let mut out = vec![1u64; k as usize + 1];
    for v in 1..=k as usize {
        out[v] = out[v - 1].wrapping_mul(inv);
    }
    out
}

fn valuation_table(p: u64, k: u32, m: u64) -> Option<Vec<u8>> {
    if m > SMALL_MODULUS {
        return None;
    }
    let mut table = vec![0u8; m as usize];
    table[0] = k as u8;
    let mut step = p;
    for v in 1..k {
        for x in (step..m).step_by(step as usize) {
            table[x as usize] = v as u8;
        }
        step *= p;
    }
    Some(table)
}

/// A chain ring `Z/p^k` or `(Z/p^k)[t]/(P(t))`. Cheap to clone.
#[derive(Clone)]
pub struct ChainRing(Arc<RingData>);

impl ChainRing {
    /// `Z/p^k`.
    pub fn integers(p: u64, k: u32) -> Result<Self> {
        Self::build(PrimePowerModulus::new(p, k)?, None)
    }

    /// `(Z/p^k)[t]/(P(t))`.
    pub fn extension(poly: &PolySpec, k: u32) -> Result<Self> {
        Self::build(PrimePowerModulus::new(poly.p(), k)?, Some(poly.clone()))
    }

    pub fn new(modulus: PrimePowerModulus, poly: Option<PolySpec>) -> Result<Self> {
        Self::build(modulus, poly)
    }

    fn build(modulus: PrimePowerModulus, poly: Option<PolySpec>) -> Result<Self> {
        let p = modulus.p();
        let (degree, neg_lower, residue_poly) = match &poly {
            Some(poly) => {
                if poly.p() != p {
                    return Err(Error::RingMismatch(format!(
                        "polynomial over p = {} attached to modulus with p = {p}",
                        poly.p()
                    )));
                }
                let m = modulus.value();
                let neg = poly
                    .reduced_lower(m)
                    .into_iter()
                    .map(|c| (m - c) % m)
                    .collect();
                let mut residue = poly.reduced_lower(p);
                residue.push(1);
                (poly.degree(), neg, residue)
            }
            None => (1, Vec::new(), vec![0, 1]),
        };
        // Ring size p^(k d) is used as the bound for the inverse table.
        let powers = (0..=modulus.k()).map(|i| p.pow(i)).collect();
        Ok(ChainRing(Arc::new(RingData {
            modulus,
            poly,
            degree,
            neg_lower,
            powers,
            residue_poly,
            inverse_table: OnceLock::new(),
            inversions: AtomicU32::new(0),
            reducer: reducer(modulus.value()),
            valuations: valuation_table(p, modulus.k(), modulus.value()),
            exact_inverse: exact_inverses(p, modulus.k()),
        })))
    }

    pub fn modulus(&self) -> PrimePowerModulus {
        self.0.modulus
    }

    pub fn p(&self) -> u64 {
        self.0.modulus.p()
    }

    pub fn k(&self) -> u32 {
        self.0.modulus.k()
    }

    /// `p^k`.
    pub fn m(&self) -> u64 {
        self.0.modulus.value()
    }

    pub fn poly(&self) -> Option<&PolySpec> {
        self.0.poly.as_ref()
    }

    /// Number of coordinates per element, the residue degree of the ring.
    pub fn degree(&self) -> usize {
        self.0.degree
    }

    /// Size `q = p^d` of the residue field.
    pub fn residue_field_size(&self) -> u64 {
        self.p().pow(self.degree() as u32)
    }

    /// Number of elements, if it fits in a `u64`.
    pub fn size(&self) -> Option<u64> {
        self.m().checked_pow(self.degree() as u32)
    }

    /// `p^i` for `i <= k`.
    pub fn pow_p(&self, i: u32) -> u64 {
        self.0.powers[i as usize]
    }

    /// The same ring with a different modulus exponent.
    pub fn with_exponent(&self, k: u32) -> Result<ChainRing> {
        ChainRing::new(PrimePowerModulus::new(self.p(), k)?, self.0.poly.clone())
    }

    /// The residue field `F_q`, the `k = 1` instance.
    pub fn residue_field(&self) -> ChainRing {
        self.with_exponent(1).expect("k = 1 always fits")
    }

    pub fn zero(&self) -> ChainRingElement {
        ChainRingElement {
            ring: self.clone(),
            coeffs: vec![0; self.degree()],
        }
    }

    pub fn one(&self) -> ChainRingElement {
        self.from_int(1)
    }

    pub fn from_int(&self, value: i64) -> ChainRingElement {
        let mut e = self.zero();
        e.coeffs[0] = self.reduce_int(value);
        e
    }

    /// Element from integer coordinates in the basis `1, t, ..., t^(d-1)`.
    pub fn element(&self, coords: &[i64]) -> Result<ChainRingElement> {
        if coords.len() != self.degree() {
            return Err(Error::Shape(format!(
                "expected {} coordinates, got {}",
                self.degree(),
                coords.len()
            )));
        }
        Ok(ChainRingElement {
            ring: self.clone(),
            coeffs: coords.iter().map(|&c| self.reduce_int(c)).collect(),
        })
    }

    pub(crate) fn element_from_slice(&self, coords: &[u64]) -> ChainRingElement {
        debug_assert_eq!(coords.len(), self.degree());
        ChainRingElement {
            ring: self.clone(),
            coeffs: coords.to_vec(),
        }
    }

    /// The class of `t`. For degree one this is the constant `-a_0`.
    pub fn t_bar(&self) -> Option<ChainRingElement> {
        let poly = self.poly()?;
        let mut e = self.zero();
        if poly.degree() == 1 {
            e.coeffs[0] = self.0.neg_lower[0];
        } else {
            e.coeffs[1] = 1 % self.m();
        }
        Some(e)
    }

    pub fn reduce_int(&self, value: i64) -> u64 {
        value.rem_euclid(self.m() as i64) as u64
    }

    /// Every element of the ring, in index order. Panics past 2^24 elements.
    pub fn elements(&self) -> Vec<ChainRingElement> {
        let size = self.size().filter(|&s| s <= 1 << 24).expect("ring too large to list");
        (0..size)
            .map(|i| self.element_from_slice(&digits_base(i, self.m(), self.degree())))
            .collect()
    }

    #[inline]
    pub(crate) fn mulmod(&self, a: u64, b: u64) -> u64 {
        self.0.reducer.mul(a, b)
    }

    /// Tables for `Z/p^k`-like rings (degree one) with `p^k <= 2^16`.
    pub(crate) fn small_tables(&self) -> Option<SmallTables<'_>> {
        if self.degree() != 1 {
            return None;
        }
        Some(SmallTables {
            valuations: self.0.valuations.as_deref()?,
            inverses: self.inverse_table(true)?,
            exact_inverse: &self.0.exact_inverse,
            reducer: self.0.reducer,
            m: self.m(),
            k: self.k(),
            two: self.p() == 2,
        })
    }

    #[inline]
    pub fn add_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let m = self.m();
        for i in 0..self.degree() {
            let s = a[i] + b[i];
            out[i] = if s >= m { s - m } else { s };
        }
    }

    #[inline]
    pub fn sub_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let m = self.m();
        for i in 0..self.degree() {
            out[i] = if a[i] >= b[i] { a[i] - b[i] } else { a[i] + m - b[i] };
        }
    }

    #[inline]
    pub fn neg_into(&self, a: &[u64], out: &mut [u64]) {
        let m = self.m();
        for i in 0..self.degree() {
            out[i] = if a[i] == 0 { 0 } else { m - a[i] };
        }
    }

    /// `out = a * b`. `out` may not alias the inputs.
    #[inline]
    pub fn mul_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let d = self.degree();
        if d == 1 {
            out[0] = self.mulmod(a[0], b[0]);
            return;
        }
        let m = self.m();
        let mut tmp = [0u64; 2 * MAX_DEGREE - 1];
        for i in 0..d {
            if a[i] == 0 {
                continue;
            }
            for j in 0..d {
                let s = tmp[i + j] + self.mulmod(a[i], b[j]);
                tmp[i + j] = if s >= m { s - m } else { s };
            }
        }
        for top in (d..2 * d - 1).rev() {
            let c = tmp[top];
            if c == 0 {
                continue;
            }
            for j in 0..d {
                let s = tmp[top - d + j] + self.mulmod(c, self.0.neg_lower[j]);
                tmp[top - d + j] = if s >= m { s - m } else { s };
            }
        }
        out[..d].copy_from_slice(&tmp[..d]);
    }

    /// `acc -= c * b`.
    #[inline]
    pub fn sub_mul_assign(&self, acc: &mut [u64], c: &[u64], b: &[u64]) {
        let mut prod = [0u64; MAX_DEGREE];
        let d = self.degree();
        self.mul_into(c, b, &mut prod[..d]);
        let m = self.m();
        for i in 0..d {
            acc[i] = if acc[i] >= prod[i] { acc[i] - prod[i] } else { acc[i] + m - prod[i] };
        }
    }

    #[inline]
    pub(crate) fn scalar_valuation(&self, x: u64) -> u32 {
        if let Some(table) = &self.0.valuations {
            return table[x as usize] as u32;
        }
        if x == 0 {
            return self.k();
        }
        let p = self.p();
        if p == 2 {
            return x.trailing_zeros();
        }
        let mut v = 0;
        let mut x = x;
        while x.is_multiple_of(p) {
            x /= p;
            v += 1;
        }
        v
    }

    /// Valuation of one element; `k` for zero.
    #[inline]
    pub fn valuation_of(&self, a: &[u64]) -> u32 {
        let mut v = self.k();
        for &c in &a[..self.degree()] {
            if c != 0 {
                v = v.min(self.scalar_valuation(c));
                if v == 0 {
                    break;
                }
            }
        }
        v
    }

    /// Exact division of every coordinate by `p^v`; `a` must have valuation `>= v`.
    #[inline]
    pub fn div_pow_p_into(&self, a: &[u64], v: u32, out: &mut [u64]) {
        let pv = self.pow_p(v);
        for i in 0..self.degree() {
            out[i] = a[i] / pv;
        }
    }

    fn encode(&self, a: &[u64]) -> u64 {
        a[..self.degree()]
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.m() + c)
    }

    /// Inverse of a unit, written to `out`.
    pub fn inverse_into(&self, a: &[u64], out: &mut [u64]) -> Result<()> {
        let v = self.valuation_of(a);
        if v > 0 {
            return Err(Error::NotUnit { valuation: v });
        }
        let d = self.degree();
        if let Some(table) = self.inverse_table(false) {
            let inv = table[self.encode(a) as usize];
            out[..d].copy_from_slice(&digits_base(inv, self.m(), d));
            return Ok(());
        }
        self.newton_inverse_into(a, out);
        Ok(())
    }

    /// Inverse of a unit of `Z/p^k` given as one residue.
    #[inline]
    pub(crate) fn scalar_inverse(&self, u: u64) -> u64 {
        if let Some(table) = self.inverse_table(false) {
            return table[u as usize];
        }
        let m = self.m() as i128;
        let (mut r0, mut r1) = (m, u as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        s0.rem_euclid(m) as u64
    }

    /// Builds the inverse table now, for rings about to do many inversions.
    pub(crate) fn prepare_inverses(&self) {
        self.inverse_table(true);
    }

    fn inverse_table(&self, force: bool) -> Option<&Vec<u64>> {
        if !force
            && self.degree() > 1
            && self.0.inverse_table.get().is_none()
            && self.0.inversions.fetch_add(1, Ordering::Relaxed) < INVERSE_TABLE_WARMUP
        {
            return None;
        }
        self.0
            .inverse_table
            .get_or_init(|| {
                let size = self.size().filter(|&s| s <= INVERSE_TABLE_LIMIT)?;
                let d = self.degree();
                let mut table = vec![0; size as usize];
                let mut inv = vec![0; d];
                for index in 0..size {
                    let a = digits_base(index, self.m(), d);
                    if self.valuation_of(&a) == 0 {
                        self.newton_inverse_into(&a, &mut inv);
                        table[index as usize] = self.encode(&inv);
                    }
                }
                Some(table)
            })
            .as_ref()
    }

    /// Residue-field inverse lifted by Newton iteration `y <- y (2 - a y)`.
    pub(crate) fn newton_inverse_into(&self, a: &[u64], out: &mut [u64]) {
        let d = self.degree();
        let p = self.p();
        let residue: Vec<u64> = a[..d].iter().map(|&c| c % p).collect();
        let y0 = if self.0.poly.is_some() && d > 1 {
            fp::inverse_mod(&residue, &self.0.residue_poly, p).expect("unit has a residue inverse")
        } else {
            vec![fp::inv(residue[0], p)]
        };
        let mut y = [0u64; MAX_DEGREE];
        y[..y0.len()].copy_from_slice(&y0);
        let mut two = [0u64; MAX_DEGREE];
        two[0] = 2 % self.m();
        let mut ay = [0u64; MAX_DEGREE];
        let mut corr = [0u64; MAX_DEGREE];
        let mut next = [0u64; MAX_DEGREE];
        let mut precision = 1;
        while precision < self.k() {
            self.mul_into(a, &y[..d], &mut ay[..d]);
            self.sub_into(&two[..d], &ay[..d], &mut corr[..d]);
            self.mul_into(&y[..d], &corr[..d], &mut next[..d]);
            y[..d].copy_from_slice(&next[..d]);
            precision *= 2;
        }
        out[..d].copy_from_slice(&y[..d]);
    }

    fn check_same(&self, other: &ChainRing) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!("{self} vs {other}")))
        }
    }

    /// Parses `"c0+c1*t+c2*t^2"`; a bare integer is a constant.
    pub fn parse_element(&self, text: &str) -> Result<ChainRingElement> {
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(Error::parse("empty element"));
        }
        let mut acc = self.zero();
        for term in text.replace('-', "+-").split('+').filter(|s| !s.is_empty()) {
            let (coef_text, power) = match term.find('t') {
                None => (term, 0u32),
                Some(pos) => {
                    let coef = term[..pos].trim_end_matches('*');
                    let rest = &term[pos + 1..];
                    let power = if rest.is_empty() {
                        1
                    } else {
                        rest.strip_prefix('^')
                            .and_then(|e| e.parse().ok())
                            .ok_or_else(|| Error::parse(format!("bad term {term:?}")))?
                    };
                    let coef = match coef {
                        "" => "1",
                        "-" => "-1",
                        c => c,
                    };
                    (coef, power)
                }
            };
            let c: i64 = coef_text
                .parse()
                .map_err(|_| Error::parse(format!("bad coefficient in {term:?}")))?;
            let mut monomial = self.from_int(c);
            if power > 0 {
                let t = self
                    .t_bar()
                    .ok_or_else(|| Error::parse("t is not defined in Z/p^k"))?;
                for _ in 0..power {
                    monomial = monomial.mul(&t)?;
                }
            }
            acc = acc.add(&monomial)?;
        }
        Ok(acc)
    }
}

impl PartialEq for ChainRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.modulus == other.0.modulus && self.0.poly == other.0.poly)
    }
}

impl Eq for ChainRing {}

impl Hash for ChainRing {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.modulus.hash(state);
        self.0.poly.hash(state);
    }
}

impl fmt::Debug for ChainRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainRing({self})")
    }
}

impl fmt::Display for ChainRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.poly {
            None => write!(f, "Z/{}^{}", self.p(), self.k()),
            Some(poly) => write!(f, "(Z/{}^{})[t]/({})", self.p(), self.k(), poly),
        }
    }
}

/// An element of a [`ChainRing`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChainRingElement {
    ring: ChainRing,
    coeffs: Vec<u64>,
}

impl ChainRingElement {
    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }

    /// Coordinates in `[0, p^k)`, basis `1, t, ..., t^(d-1)`.
    pub fn coords(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    pub fn valuation(&self) -> u32 {
        self.ring.valuation_of(&self.coeffs)
    }

    fn binary(
        &self,
        other: &ChainRingElement,
        op: impl Fn(&ChainRing, &[u64], &[u64], &mut [u64]),
    ) -> Result<ChainRingElement> {
        self.ring.check_same(&other.ring)?;
        let mut out = vec![0; self.ring.degree()];
        op(&self.ring, &self.coeffs, &other.coeffs, &mut out);
        Ok(ChainRingElement {
            ring: self.ring.clone(),
            coeffs: out,
        })
    }

    pub fn add(&self, other: &ChainRingElement) -> Result<ChainRingElement> {
        self.binary(other, ChainRing::add_into)
    }

    pub fn sub(&self, other: &ChainRingElement) -> Result<ChainRingElement> {
        self.binary(other, ChainRing::sub_into)
    }

    pub fn mul(&self, other: &ChainRingElement) -> Result<ChainRingElement> {
        self.binary(other, ChainRing::mul_into)
    }

    pub fn neg(&self) -> ChainRingElement {
        let mut out = vec![0; self.ring.degree()];
        self.ring.neg_into(&self.coeffs, &mut out);
        ChainRingElement {
            ring: self.ring.clone(),
            coeffs: out,
        }
    }

    pub fn inverse(&self) -> Result<ChainRingElement> {
        let mut out = vec![0; self.ring.degree()];
        self.ring.inverse_into(&self.coeffs, &mut out)?;
        Ok(ChainRingElement {
            ring: self.ring.clone(),
            coeffs: out,
        })
    }

    /// A unit `u` with `self = u * p^valuation`; `None` for zero.
    ///
    /// `u` is only determined modulo `p^(k - v)`; this returns the
    /// coordinate-wise quotient.
    pub fn unit_part(&self) -> Option<ChainRingElement> {
        let v = self.valuation();
        if v == self.ring.k() {
            return None;
        }
        let mut out = vec![0; self.ring.degree()];
        self.ring.div_pow_p_into(&self.coeffs, v, &mut out);
        Some(ChainRingElement {
            ring: self.ring.clone(),
            coeffs: out,
        })
    }

    /// `p^e` as an element of the same ring (zero once `e >= k`).
    pub fn pow_p(ring: &ChainRing, e: u32) -> ChainRingElement {
        if e >= ring.k() {
            ring.zero()
        } else {
            ring.from_int(ring.pow_p(e) as i64)
        }
    }

    /// Image under the canonical surjection to exponent `k' <= k`.
    pub fn reduce_to(&self, k: u32) -> Result<ChainRingElement> {
        if k > self.ring.k() {
            return Err(Error::Precision {
                from: self.ring.k(),
                to: k,
            });
        }
        let ring = self.ring.with_exponent(k)?;
        let m = ring.m();
        let coeffs = self.coeffs.iter().map(|&c| c % m).collect();
        Ok(ChainRingElement { ring, coeffs })
    }
}

impl fmt::Display for ChainRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            terms.push(match i {
                0 => c.to_string(),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{i}"),
            });
        }
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join("+"))
        }
    }
}

impl fmt::Debug for ChainRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} in {}", self.ring)
    }
}

/// Residue degree of an optional polynomial (1 for `Z/p^k`).
pub fn residue_degree(poly: Option<&PolySpec>) -> usize {
    poly.map_or(1, PolySpec::degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4_ring(k: u32) -> ChainRing {
        ChainRing::extension(&PolySpec::new(&[1, 1, 1], 2).unwrap(), k).unwrap()
    }

    #[test]
    fn modular_addition_and_zero_divisors() {
        let z8 = ChainRing::integers(2, 3).unwrap();
        assert_eq!(z8.from_int(3).add(&z8.from_int(7)).unwrap(), z8.from_int(2));
        assert_eq!(z8.from_int(2).mul(&z8.from_int(4)).unwrap(), z8.zero());
    }

    #[test]
    fn additive_inverse_in_extension() {
        let r = f4_ring(2);
        let a = r.element(&[1, 1]).unwrap();
        let b = r.element(&[3, 3]).unwrap();
        assert!(a.add(&b).unwrap().is_zero());
    }

    #[test]
    fn defining_relation() {
        let r = f4_ring(2);
        let t = r.t_bar().unwrap();
        assert_eq!(t.mul(&t).unwrap(), r.element(&[3, 3]).unwrap());
        let f4 = f4_ring(1);
        let t = f4.t_bar().unwrap();
        let t1 = f4.element(&[1, 1]).unwrap();
        assert_eq!(t.mul(&t1).unwrap(), f4.one());
    }

    #[test]
    fn inverses() {
        let z8 = ChainRing::integers(2, 3).unwrap();
        assert_eq!(z8.from_int(3).inverse().unwrap(), z8.from_int(3));
        assert_eq!(
            z8.from_int(2).inverse().unwrap_err(),
            Error::NotUnit { valuation: 1 }
        );
        let r = f4_ring(2);
        let t = r.t_bar().unwrap();
        assert_eq!(t.inverse().unwrap(), r.element(&[3, 3]).unwrap());
    }

    #[test]
    fn inverse_table_matches_newton() {
        for ring in [ChainRing::integers(3, 4).unwrap(), f4_ring(3)] {
            let d = ring.degree();
            for _ in 0..=INVERSE_TABLE_WARMUP {
                ring.one().inverse().unwrap();
            }
            assert!(ring.0.inverse_table.get().is_some_and(Option::is_some));
            for x in ring.elements().into_iter().filter(|x| x.is_unit()) {
                let mut direct = vec![0; d];
                ring.newton_inverse_into(x.coords(), &mut direct);
                assert_eq!(x.inverse().unwrap().coords(), &direct[..]);
                assert_eq!(x.mul(&x.inverse().unwrap()).unwrap(), ring.one());
            }
        }
    }

    #[test]
    fn large_modulus_inverse() {
        let ring = ChainRing::integers(3, 39).unwrap();
        let x = ring.from_int(1_234_567_891);
        assert_eq!(x.mul(&x.inverse().unwrap()).unwrap(), ring.one());
    }

    #[test]
    fn valuations() {
        let z16 = ChainRing::integers(2, 4).unwrap();
        assert_eq!(z16.from_int(12).valuation(), 2);
        assert_eq!(z16.zero().valuation(), 4);
        let r = ChainRing::extension(&PolySpec::new(&[1, 1, 1], 2).unwrap(), 3).unwrap();
        assert_eq!(r.element(&[2, 6]).unwrap().valuation(), 1);
    }

    #[test]
    fn irreducibility() {
        assert!(check_irreducible(&[1, 1, 1], 2).unwrap());
        assert!(!check_irreducible(&[1, 0, 1], 2).unwrap());
        assert!(check_irreducible(&[1, 1, 0, 1], 2).unwrap());
        assert!(check_irreducible(&[1, 2, 0, 1], 3).unwrap());
        assert_eq!(check_irreducible(&[1, 2], 2), Err(Error::NotMonic));
        assert!(matches!(PolySpec::new(&[1, 0, 1], 2), Err(Error::Reducible { .. })));
    }

    #[test]
    fn first_irreducible_polynomials() {
        assert_eq!(PolySpec::first_irreducible(2, 2).unwrap().coefficients(), vec![1, 1, 1]);
        assert_eq!(PolySpec::first_irreducible(3, 2).unwrap().coefficients(), vec![1, 0, 1]);
        assert_eq!(PolySpec::first_irreducible(5, 1).unwrap().coefficients(), vec![0, 1]);
    }

    #[test]
    fn constructor_limits() {
        assert_eq!(PrimePowerModulus::new(4, 2), Err(Error::NotPrime(4)));
        assert_eq!(PrimePowerModulus::new(2, 0), Err(Error::ZeroExponent));
        assert!(PrimePowerModulus::new(2, 61).is_ok());
        assert!(matches!(PrimePowerModulus::new(2, 62), Err(Error::ModulusTooLarge { .. })));
    }

    #[test]
    fn parse_and_display() {
        let r = f4_ring(2);
        let x = r.parse_element("1+3*t").unwrap();
        assert_eq!(x, r.element(&[1, 3]).unwrap());
        assert_eq!(x.to_string(), "1+3*t");
        assert_eq!(r.parse_element("t^2").unwrap(), r.element(&[3, 3]).unwrap());
        assert_eq!(r.parse_element("-t").unwrap(), r.element(&[0, 3]).unwrap());
        assert_eq!(r.zero().to_string(), "0");
        let z8 = ChainRing::integers(2, 3).unwrap();
        assert_eq!(z8.parse_element("-1").unwrap(), z8.from_int(7));
        assert!(z8.parse_element("t").is_err());
    }

    #[test]
    fn degree_one_extension_t_is_a_constant() {
        let r = ChainRing::extension(&PolySpec::new(&[-1, 1], 3).unwrap(), 2).unwrap();
        assert_eq!(r.t_bar().unwrap(), r.from_int(1));
    }

    #[test]
    fn valuation_is_multiplicative_up_to_cap() {
        for ring in [ChainRing::integers(2, 3).unwrap(), f4_ring(2)] {
            let all = ring.elements();
            for x in &all {
                for y in &all {
                    let v = (x.valuation() + y.valuation()).min(ring.k());
                    assert_eq!(x.mul(y).unwrap().valuation(), v, "{x:?} {y:?}");
                }
            }
        }
    }

    #[test]
    fn unit_decomposition_reconstructs() {
        for ring in [ChainRing::integers(3, 3).unwrap(), f4_ring(3)] {
            for x in ring.elements().into_iter().filter(|x| !x.is_zero()) {
                let u = x.unit_part().unwrap();
                assert!(u.is_unit());
                let pv = ChainRingElement::pow_p(&ring, x.valuation());
                assert_eq!(u.mul(&pv).unwrap(), x);
            }
        }
    }

    #[test]
    fn reduction_is_a_homomorphism() {
        for ring in [ChainRing::integers(2, 3).unwrap(), f4_ring(3)] {
            let all = ring.elements();
            for x in all.iter().step_by(3) {
                for y in all.iter().step_by(5) {
                    for k in 1..ring.k() {
                        let sum = x.add(y).unwrap().reduce_to(k).unwrap();
                        let prod = x.mul(y).unwrap().reduce_to(k).unwrap();
                        let (xr, yr) = (x.reduce_to(k).unwrap(), y.reduce_to(k).unwrap());
                        assert_eq!(sum, xr.add(&yr).unwrap());
                        assert_eq!(prod, xr.mul(&yr).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = ChainRing::integers(2, 3).unwrap().one();
        let b = ChainRing::integers(2, 2).unwrap().one();
        assert!(matches!(a.add(&b), Err(Error::RingMismatch(_))));
    }
}
