//! Isomorphism classes of finite modules over a DVR with residue field `F_q`.
//!
//! A class is a list of parts `(e_i, r_i)` meaning `(S/p^e_i)^r_i` with the
//! exponents strictly decreasing. Equality of classes is structural equality
//! of that canonical list, together with the residue degree `d` of the ring
//! (`q = p^d`).

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{digits_base, is_prime, ChainRing, PolySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Part {
    pub exponent: u32,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "ModuleTypeRepr", try_from = "ModuleTypeRepr")]
pub struct ModuleType {
    parts: Vec<Part>,
    residue_degree: u32,
}

#[derive(Clone, Serialize, Deserialize)]
struct ModuleTypeRepr {
    #[serde(rename = "type")]
    text: String,
    residue_degree: u32,
}

impl From<ModuleType> for ModuleTypeRepr {
    fn from(g: ModuleType) -> Self {
        ModuleTypeRepr {
            text: g.to_string(),
            residue_degree: g.residue_degree,
        }
    }
}

impl TryFrom<ModuleTypeRepr> for ModuleType {
    type Error = Error;
    fn try_from(repr: ModuleTypeRepr) -> Result<Self> {
        ModuleType::parse(&repr.text, repr.residue_degree)
    }
}

impl ModuleType {
    /// Canonicalizes arbitrary `(exponent, multiplicity)` pairs: equal
    /// exponents merge, zero exponents and multiplicities drop out.
    pub fn new(parts: impl IntoIterator<Item = (u32, u32)>, residue_degree: u32) -> Self {
        let mut merged: Vec<Part> = Vec::new();
        let mut raw: Vec<(u32, u32)> = parts
            .into_iter()
            .filter(|&(e, r)| e > 0 && r > 0)
            .collect();
        raw.sort_unstable_by_key(|a| std::cmp::Reverse(a.0));
        for (exponent, multiplicity) in raw {
            match merged.last_mut() {
                Some(last) if last.exponent == exponent => last.multiplicity += multiplicity,
                _ => merged.push(Part {
                    exponent,
                    multiplicity,
                }),
            }
        }
        ModuleType {
            parts: merged,
            residue_degree,
        }
    }

    pub fn trivial(residue_degree: u32) -> Self {
        ModuleType::new([], residue_degree)
    }

    /// `S/p^e` for one exponent; `R/p` in the usual notation when `e = 1`.
    pub fn cyclic(exponent: u32, residue_degree: u32) -> Self {
        ModuleType::new([(exponent, 1)], residue_degree)
    }

    /// The class `⊕ S/p^(d_i)` for a list of invariant-factor exponents.
    pub fn from_invariant_exponents(exponents: &[u32], residue_degree: u32) -> Self {
        ModuleType::new(exponents.iter().map(|&e| (e, 1)), residue_degree)
    }

    /// Parses `"e1^r1,e2^r2,..."`, with `"0"` for the trivial module. A bare
    /// exponent `e` means `e^1`.
    pub fn parse(text: &str, residue_degree: u32) -> Result<Self> {
        let text = text.trim();
        if text == "0" || text.is_empty() {
            return Ok(ModuleType::trivial(residue_degree));
        }
        let mut parts = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            let (e, r) = match item.split_once('^') {
                Some((e, r)) => (e, r),
                None => (item, "1"),
            };
            let e: u32 = e
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad exponent in {item:?}")))?;
            let r: u32 = r
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad multiplicity in {item:?}")))?;
            if e == 0 || r == 0 {
                return Err(Error::parse(format!("zero exponent or multiplicity in {item:?}")));
            }
            parts.push((e, r));
        }
        Ok(ModuleType::new(parts, residue_degree))
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn residue_degree(&self) -> u32 {
        self.residue_degree
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.is_empty()
    }

    /// `dim_{F_q} G/pG`, the minimal number of generators.
    pub fn residue_rank(&self) -> u32 {
        self.parts.iter().map(|p| p.multiplicity).sum()
    }

    /// `log_q |G|`.
    pub fn order_log_q(&self) -> u32 {
        self.parts.iter().map(|p| p.exponent * p.multiplicity).sum()
    }

    /// Largest exponent `e_1`, 0 for the trivial module.
    pub fn exponent(&self) -> u32 {
        self.parts.first().map_or(0, |p| p.exponent)
    }

    /// Whether `p^n G = 0`.
    pub fn annihilated_by(&self, n: u32) -> bool {
        self.exponent() <= n
    }

    /// `G/pG`.
    pub fn quotient_mod_p(&self) -> ModuleType {
        ModuleType::new([(1, self.residue_rank())], self.residue_degree)
    }

    /// The class of `G` as a `Z_p`-module: each `S/p^e` is `(Z/p^e)^d`.
    pub fn underlying_group(&self) -> ModuleType {
        let d = self.residue_degree;
        ModuleType::new(
            self.parts.iter().map(|p| (p.exponent, p.multiplicity * d)),
            1,
        )
    }

    /// Cyclic exponents with multiplicity, largest first.
    pub fn cyclic_exponents(&self) -> Vec<u32> {
        self.parts
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.exponent, p.multiplicity as usize))
            .collect()
    }

    /// Invariant-factor exponents of an `n x n` presentation, ascending and
    /// padded with zeros; `None` when `G` needs more than `n` generators.
    pub fn invariant_exponents(&self, n: usize) -> Option<Vec<u32>> {
        let r = self.residue_rank() as usize;
        if r > n {
            return None;
        }
        let mut out = vec![0; n - r];
        out.extend(self.cyclic_exponents().into_iter().rev());
        Some(out)
    }

    /// Every class with residue rank `rank` and exponent at most `max_exponent`.
    pub fn all_with_rank(rank: u32, max_exponent: u32, residue_degree: u32) -> Vec<ModuleType> {
        let mut out = Vec::new();
        if rank == 0 {
            out.push(ModuleType::trivial(residue_degree));
            return out;
        }
        if max_exponent == 0 {
            return out;
        }
        // Multisets of `rank` exponents in [1, max_exponent], as
        // nonincreasing sequences.
        fn rec(remaining: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if remaining == 0 {
                out.push(cur.clone());
                return;
            }
            for e in (1..=cap).rev() {
                cur.push(e);
                rec(remaining - 1, e, cur, out);
                cur.pop();
            }
        }
        let mut seqs = Vec::new();
        rec(rank, max_exponent, &mut Vec::new(), &mut seqs);
        for seq in seqs {
            out.push(ModuleType::from_invariant_exponents(&seq, residue_degree));
        }
        out
    }

    /// Every class with `log_q |G| <= max_order`, the trivial one included.
    pub fn all_up_to_order(max_order: u32, residue_degree: u32) -> Vec<ModuleType> {
        // Partitions of each total into parts, nonincreasing.
        fn rec(remaining: u32, cap: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            out.push(cur.clone());
            for e in (1..=cap.min(remaining)).rev() {
                cur.push(e);
                rec(remaining - e, e, cur, out);
                cur.pop();
            }
        }
        let mut seqs = Vec::new();
        rec(max_order, max_order, &mut Vec::new(), &mut seqs);
        seqs.iter()
            .map(|s| ModuleType::from_invariant_exponents(s, residue_degree))
            .collect()
    }
}

impl fmt::Display for ModuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("0");
        }
        let text = self
            .parts
            .iter()
            .map(|p| format!("{}^{}", p.exponent, p.multiplicity))
            .collect::<Vec<_>>()
            .join(",");
        f.write_str(&text)
    }
}

/// Splits a prime power `q` into `(p, d)`.
pub fn prime_power_parts(q: u64) -> Result<(u64, u32)> {
    let p = (2..=q).find(|&p| q.is_multiple_of(p)).ok_or_else(|| {
        Error::InvalidInstance(format!("{q} is not a prime power"))
    })?;
    debug_assert!(is_prime(p));
    let mut rest = q;
    let mut d = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        d += 1;
    }
    if rest != 1 {
        return Err(Error::InvalidInstance(format!("{q} is not a prime power")));
    }
    Ok((p, d))
}

/// Largest module the automorphism oracle accepts, `|G| <= 2^12`.
pub const ORACLE_MAX_ORDER: u64 = 1 << 12;
const ENDOMORPHISM_BUDGET: u128 = 1 << 22;

/// How [`brute_force_aut_count_with`] counts automorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutOracleRoute {
    /// Enumerate every endomorphism and test bijectivity on all elements.
    Endomorphisms,
    /// Count the images of one generator at a time by scanning all elements.
    Chain,
    /// `Endomorphisms` when it fits the work budget, `Chain` otherwise.
    Auto,
}

/// Counts `|Aut_S(G)|` by enumeration, with `S` the unramified DVR of residue
/// field size `q`. Requires `|G| <= 2^12`.
pub fn brute_force_aut_count(g: &ModuleType, q: u64) -> Result<BigUint> {
    brute_force_aut_count_with(g, q, AutOracleRoute::Auto)
}

pub fn brute_force_aut_count_with(g: &ModuleType, q: u64, route: AutOracleRoute) -> Result<BigUint> {
    let module = FiniteModule::new(g, q)?;
    let route = match route {
        AutOracleRoute::Auto if module.endomorphism_work() <= ENDOMORPHISM_BUDGET => {
            AutOracleRoute::Endomorphisms
        }
        AutOracleRoute::Auto => AutOracleRoute::Chain,
        other => other,
    };
    Ok(match route {
        AutOracleRoute::Endomorphisms => BigUint::from(module.count_by_endomorphisms()?),
        _ => module.count_by_chain(),
    })
}

/// Number of elements of `G`, counted by listing them.
pub fn brute_force_order(g: &ModuleType, q: u64) -> Result<u64> {
    let module = FiniteModule::new(g, q)?;
    let radices: Vec<u64> = module
        .rings
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.m(), module.d))
        .collect();
    let mut digits = vec![0u64; radices.len()];
    let mut count = 0u64;
    loop {
        count += 1;
        let mut i = 0;
        while i < digits.len() {
            digits[i] += 1;
            if digits[i] < radices[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == digits.len() {
            return Ok(count);
        }
    }
}

/// `G = ⊕ S/p^f_i` with explicit element encoding, for the oracles.
struct FiniteModule {
    /// Cyclic exponents, largest first.
    exps: Vec<u32>,
    /// `S/p^f_i` for each component.
    rings: Vec<ChainRing>,
    d: usize,
    size: usize,
}

impl FiniteModule {
    fn new(g: &ModuleType, q: u64) -> Result<Self> {
        let (p, d) = prime_power_parts(q)?;
        let order = q
            .checked_pow(g.order_log_q())
            .filter(|&s| s <= ORACLE_MAX_ORDER)
            .ok_or_else(|| Error::Unsupported(format!("|G| = {q}^{} exceeds 2^12", g.order_log_q())))?;
        let poly = PolySpec::first_irreducible(p, d as usize)?;
        let exps = g.cyclic_exponents();
        let rings = exps
            .iter()
            .map(|&f| {
                if d == 1 {
                    ChainRing::integers(p, f)
                } else {
                    ChainRing::extension(&poly, f)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteModule {
            exps,
            rings,
            d: d as usize,
            size: order as usize,
        })
    }

    fn components(&self) -> usize {
        self.exps.len()
    }

    fn encode(&self, x: &[u64]) -> usize {
        let mut acc = 0usize;
        for (i, ring) in self.rings.iter().enumerate().rev() {
            for c in x[i * self.d..(i + 1) * self.d].iter().rev() {
                acc = acc * ring.m() as usize + *c as usize;
            }
        }
        acc
    }

    fn decode(&self, mut index: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.components() * self.d);
        for ring in &self.rings {
            for _ in 0..self.d {
                out.push((index % ring.m() as usize) as u64);
                index /= ring.m() as usize;
            }
        }
        out
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0; a.len()];
        for (i, ring) in self.rings.iter().enumerate() {
            let r = i * self.d..(i + 1) * self.d;
            ring.add_into(&a[r.clone()], &b[r.clone()], &mut out[r]);
        }
        out
    }

    /// `s * x` where `s` has integer coordinates; each component reduces `s`
    /// into its own ring first.
    fn scale(&self, s: &[u64], x: &[u64]) -> Vec<u64> {
        let mut out = vec![0; x.len()];
        let mut local = vec![0; self.d];
        for (i, ring) in self.rings.iter().enumerate() {
            for (l, &c) in local.iter_mut().zip(s) {
                *l = c % ring.m();
            }
            let r = i * self.d..(i + 1) * self.d;
            ring.mul_into(&local, &x[r.clone()], &mut out[r]);
        }
        out
    }

    fn basis(&self, j: usize) -> Vec<u64> {
        let mut e = vec![0; self.components() * self.d];
        e[j * self.d] = 1;
        e
    }

    /// `|End(G)| * |G|`.
    fn endomorphism_work(&self) -> u128 {
        let q = self.rings.first().map_or(1, |r| r.residue_field_size()) as u128;
        let mut log = 0u32;
        for &fi in &self.exps {
            for &fj in &self.exps {
                log += fi.min(fj);
            }
        }
        q.checked_pow(log)
            .and_then(|e| e.checked_mul(self.size as u128))
            .unwrap_or(u128::MAX)
    }

    /// Every endomorphism is a matrix `(phi_ij)` with `phi_ij` a multiple of
    /// `p^max(0, f_i - f_j)` in `S/p^f_i`; count those that are bijective.
    fn count_by_endomorphisms(&self) -> Result<u64> {
        if self.endomorphism_work() > ENDOMORPHISM_BUDGET {
            return Err(Error::Unsupported("endomorphism enumeration exceeds budget".into()));
        }
        let s = self.components();
        let d = self.d;
        // Per-entry choices: multiples of p^shift, parameterized by the
        // quotient coordinates in [0, p^(f_i - shift)).
        let mut entry_shift = Vec::with_capacity(s * s);
        let mut entry_radix = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                let shift = self.exps[i].saturating_sub(self.exps[j]);
                entry_shift.push(shift);
                entry_radix.push(self.rings[i].pow_p(self.exps[i] - shift));
            }
        }
        let elements: Vec<Vec<u64>> = (0..self.size).map(|i| self.decode(i)).collect();
        let mut digits = vec![0u64; s * s * d];
        let mut phi = vec![0u64; s * s * d];
        let mut seen = vec![false; self.size];
        let mut image = vec![0u64; s * d];
        let mut term = vec![0u64; d];
        let mut lifted = vec![0u64; d];
        let mut count = 0u64;
        loop {
            for e in 0..s * s {
                let pv = self.rings[e / s].pow_p(entry_shift[e]);
                for c in 0..d {
                    phi[e * d + c] = digits[e * d + c] * pv;
                }
            }
            seen.iter_mut().for_each(|b| *b = false);
            let mut bijective = true;
            for x in &elements {
                image.iter_mut().for_each(|c| *c = 0);
                for i in 0..s {
                    let ring = &self.rings[i];
                    for j in 0..s {
                        for c in 0..d {
                            lifted[c] = x[j * d + c] % ring.m();
                        }
                        ring.mul_into(&phi[(i * s + j) * d..(i * s + j + 1) * d], &lifted, &mut term);
                        let slot = &mut image[i * d..(i + 1) * d];
                        let acc = slot.to_vec();
                        ring.add_into(&acc, &term, slot);
                    }
                }
                let idx = self.encode(&image);
                if seen[idx] {
                    bijective = false;
                    break;
                }
                seen[idx] = true;
            }
            if bijective {
                count += 1;
            }
            // Odometer over every coordinate of every entry.
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    return Ok(count);
                }
                digits[pos] += 1;
                if digits[pos] < entry_radix[pos / d] {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Images of the generators `e_1, e_2, ...` (largest exponent first) are
    /// chosen one at a time; with that order every injective partial choice
    /// extends to an automorphism, so the number of admissible images of
    /// `e_j` does not depend on the earlier choices and the counts multiply.
    fn count_by_chain(&self) -> BigUint {
        let mut span = vec![false; self.size];
        span[0] = true;
        let mut total = BigUint::from(1u32);
        for j in 0..self.components() {
            let f = self.exps[j];
            let scalars: Vec<Vec<u64>> = {
                let ring = &self.rings[j];
                let count = ring.size().expect("oracle rings are small");
                (1..count)
                    .map(|i| digits_base(i, ring.m(), self.d))
                    .collect()
            };
            let mut admissible = 0u64;
            for idx in 0..self.size {
                let x = self.decode(idx);
                if !self.killed_by(&x, f) {
                    continue;
                }
                // S x must be free of rank one over S/p^f and meet the span
                // of the earlier images only in 0.
                if scalars.iter().all(|s| !span[self.encode(&self.scale(s, &x))]) {
                    admissible += 1;
                }
            }
            total *= admissible;
            let e = self.basis(j);
            let mut next = span.clone();
            let members: Vec<usize> = (0..self.size).filter(|&i| span[i]).collect();
            for s in &scalars {
                let se = self.scale(s, &e);
                for &h in &members {
                    next[self.encode(&self.add(&self.decode(h), &se))] = true;
                }
            }
            span = next;
        }
        total
    }

    fn killed_by(&self, x: &[u64], f: u32) -> bool {
        self.rings.iter().enumerate().all(|(i, ring)| {
            let pf = if f >= ring.k() { 0 } else { ring.pow_p(f) };
            x[i * self.d..(i + 1) * self.d]
                .iter()
                .all(|&c| ring.mulmod(c, pf % ring.m()) == 0)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(text: &str) -> ModuleType {
        ModuleType::parse(text, 1).unwrap()
    }

    #[test]
    fn canonical_form_and_text() {
        let a = ModuleType::new([(1, 1), (2, 1), (1, 1)], 1);
        assert_eq!(a.to_string(), "2^1,1^2");
        assert_eq!(a, g("2^1,1^2"));
        assert_eq!(g("0"), ModuleType::trivial(1));
        assert_eq!(g("1,1"), g("1^2"));
        assert!(ModuleType::parse("1^0", 1).is_err());
        assert!(ModuleType::parse("x", 1).is_err());
    }

    #[test]
    fn ranks_orders_exponents() {
        let a = g("2^1,1^2");
        assert_eq!(a.residue_rank(), 3);
        assert_eq!(a.order_log_q(), 4);
        assert_eq!(a.exponent(), 2);
        assert!(a.annihilated_by(2));
        assert!(!a.annihilated_by(1));
        let t = ModuleType::trivial(1);
        assert_eq!(t.residue_rank(), 0);
        assert_eq!(t.exponent(), 0);
        assert!(t.annihilated_by(0));
    }

    #[test]
    fn quotient_and_underlying_group() {
        assert_eq!(g("2^1,1^2").quotient_mod_p(), g("1^3"));
        assert_eq!(g("1^4").quotient_mod_p(), g("1^4"));
        assert_eq!(g("0").quotient_mod_p(), g("0"));
        let over_f4 = ModuleType::parse("1^1", 2).unwrap();
        assert_eq!(over_f4.underlying_group(), g("1^2"));
        let mixed = ModuleType::parse("2^1,1^1", 2).unwrap();
        assert_eq!(mixed.underlying_group(), g("2^2,1^2"));
        assert_eq!(ModuleType::trivial(2).underlying_group(), g("0"));
    }

    #[test]
    fn invariant_exponent_padding() {
        assert_eq!(g("2^1,1^1").invariant_exponents(3), Some(vec![0, 1, 2]));
        assert_eq!(g("1^3").invariant_exponents(2), None);
    }

    #[test]
    fn enumerating_classes() {
        assert_eq!(ModuleType::all_with_rank(2, 2, 1).len(), 3);
        assert_eq!(ModuleType::all_with_rank(0, 0, 1), vec![g("0")]);
        assert!(ModuleType::all_with_rank(1, 0, 1).is_empty());
        // p(0) + ... + p(4) = 1 + 1 + 2 + 3 + 5
        assert_eq!(ModuleType::all_up_to_order(4, 1).len(), 12);
    }

    #[test]
    fn automorphism_oracle_small_cases() {
        assert_eq!(brute_force_aut_count(&g("1^1"), 2).unwrap(), BigUint::from(1u32));
        assert_eq!(brute_force_aut_count(&g("1^2"), 2).unwrap(), BigUint::from(6u32));
        assert_eq!(brute_force_aut_count(&g("2^1,1^1"), 2).unwrap(), BigUint::from(8u32));
        let f4 = ModuleType::parse("1^1", 2).unwrap();
        assert_eq!(brute_force_aut_count(&f4, 4).unwrap(), BigUint::from(3u32));
        assert_eq!(brute_force_aut_count(&g("0"), 3).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn oracle_routes_agree() {
        for q in [2u64, 3, 4] {
            for module in ModuleType::all_up_to_order(3, 1) {
                let a = brute_force_aut_count_with(&module, q, AutOracleRoute::Endomorphisms);
                let Ok(a) = a else { continue };
                let b = brute_force_aut_count_with(&module, q, AutOracleRoute::Chain).unwrap();
                assert_eq!(a, b, "{module} over q = {q}");
            }
        }
    }

    #[test]
    fn oracle_scale_guard() {
        assert!(matches!(
            brute_force_aut_count(&g("1^13"), 2),
            Err(Error::Unsupported(_))
        ));
        assert!(prime_power_parts(6).is_err());
        assert_eq!(prime_power_parts(9).unwrap(), (3, 2));
    }

    #[test]
    fn element_count() {
        assert_eq!(brute_force_order(&g("2^1,1^2"), 2).unwrap(), 16);
        assert_eq!(brute_force_order(&g("1^2"), 4).unwrap(), 16);
    }

    #[test]
    fn serde_round_trip() {
        let a = ModuleType::parse("3^1,1^2", 2).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<ModuleType>(&json).unwrap(), a);
    }
}
