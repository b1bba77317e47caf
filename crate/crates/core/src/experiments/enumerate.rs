use std::collections::BTreeMap;

use rustc_hash::FxHashMap as HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_budget, check_packable, pack, pow_u128, unpack_class, ClassCounts, JointClass};
use crate::error::{Error, Result};
use crate::formulas::ProblemInstance;
use crate::matrix::RingMatrix;
use crate::module::{prime_power_parts, ModuleType};
use crate::ring::{digits_base, ChainRing, ChainRingElement, PolySpec};
use crate::snf::{exponents_in_place, LeeKernel};

const CHUNK: u64 = 1 << 12;

/// Splits `0..total` into fixed chunks, folds each with `body` and merges.
pub(super) fn par_chunks<S, I, B, M>(total: u64, init: I, body: B, merge: M) -> S
where
    S: Send,
    I: Fn() -> S + Sync + Send,
    B: Fn(&mut S, u64, u64) + Sync + Send,
    M: Fn(S, S) -> S + Sync + Send,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .fold(&init, |mut s, c| {
            body(&mut s, c * CHUNK, ((c + 1) * CHUNK).min(total));
            s
        })
        .reduce(&init, &merge)
}

/// Mixed-radix counter with all digits in `[0, radix)`.
struct Odometer {
    radix: u64,
    digits: Vec<u64>,
}

impl Odometer {
    fn new(start: u64, radix: u64, len: usize) -> Self {
        Odometer {
            radix,
            digits: digits_base(start, radix, len),
        }
    }

    #[inline]
    fn advance(&mut self) {
        for d in &mut self.digits {
            *d += 1;
            if *d < self.radix {
                return;
            }
            *d = 0;
        }
    }
}

fn merge_maps<K: std::hash::Hash + Eq>(mut a: HashMap<K, u64>, b: HashMap<K, u64>) -> HashMap<K, u64> {
    if a.len() < b.len() {
        return merge_maps(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

fn check_residue_matrix(xbar: &RingMatrix, p: u64) -> Result<usize> {
    let ring = xbar.ring();
    if ring.poly().is_some() || ring.k() != 1 || ring.p() != p {
        return Err(Error::RingMismatch(format!("residue matrix must be over F_{p}, got {ring}")));
    }
    if !xbar.is_square() || xbar.rows() == 0 {
        return Err(Error::Shape("residue matrix must be square and nonempty".into()));
    }
    Ok(xbar.rows())
}

pub(super) struct Kernels {
    pub(super) lee: Vec<LeeKernel>,
    pub(super) exps: Vec<u32>,
    pub(super) x: Vec<u64>,
}

impl Kernels {
    pub(super) fn new(polys: &[PolySpec], m: u32, n: usize) -> Self {
        Kernels {
            lee: polys
                .iter()
                .map(|poly| LeeKernel::new(poly, m, n).expect("validated ring"))
                .collect(),
            exps: vec![0; n],
            x: vec![0; n * n],
        }
    }

    /// Packed exponents of `X - t I` over every `R_j`.
    #[inline]
    pub(super) fn key(&mut self) -> u128 {
        let mut key = 0u128;
        for kernel in &mut self.lee {
            kernel.exponents(&self.x, &mut self.exps);
            for &e in &self.exps {
                key = pack(key, e);
            }
        }
        key
    }

    /// Whether `X - t I` has exponents `targets[j]` over every `R_j`,
    /// stopping at the first mismatch.
    #[inline]
    fn matches(&mut self, targets: &[Vec<u32>]) -> bool {
        for (kernel, want) in self.lee.iter_mut().zip(targets) {
            kernel.exponents(&self.x, &mut self.exps);
            if self.exps != *want {
                return false;
            }
        }
        true
    }
}

pub(super) fn validate_polys(p: u64, polys: &[PolySpec]) -> Result<()> {
    if polys.is_empty() {
        return Err(Error::InvalidInstance("at least one polynomial is needed".into()));
    }
    for (j, poly) in polys.iter().enumerate() {
        if poly.p() != p {
            return Err(Error::InvalidInstance(format!("polynomial {poly} is over p = {}", poly.p())));
        }
        if let Some(other) = polys[..j].iter().find(|o| o.same_residue(poly)) {
            return Err(Error::DuplicateResidue {
                first: other.to_string(),
                second: poly.to_string(),
                p,
            });
        }
    }
    Ok(())
}

/// `dim_{F_q} cok(P(X̄))` for each polynomial.
fn residue_coranks(xbar: &RingMatrix, polys: &[PolySpec]) -> Result<Vec<u32>> {
    let n = xbar.rows();
    polys
        .iter()
        .map(|poly| {
            let mut kernel = LeeKernel::new(poly, 1, n)?;
            let mut exps = vec![0; n];
            kernel.exponents(xbar.raw(), &mut exps);
            Ok(exps.iter().filter(|&&e| e >= 1).count() as u32)
        })
        .collect()
}

/// Histogram of joint cokernel classes over all `p^(N n^2)` lifts of `X̄`
/// to `Z/p^(N+1)`.
pub fn lift_census(xbar: &RingMatrix, polys: &[PolySpec], big_n: u32, budget: u64) -> Result<ClassCounts> {
    let p = xbar.ring().p();
    let n = check_residue_matrix(xbar, p)?;
    validate_polys(p, polys)?;
    let k = big_n + 1;
    check_packable(polys, n, k)?;
    ChainRing::integers(p, k)?;
    let total = check_budget(pow_u128(p, big_n as u64 * (n * n) as u64), budget)?;
    let radix = p.pow(big_n);
    let base = xbar.raw().to_vec();
    let counts = par_chunks(
        total,
        || (Kernels::new(polys, k, n), HashMap::<u128, u64>::default()),
        |(kernels, map), start, end| {
            let mut odo = Odometer::new(start, radix, n * n);
            for _ in start..end {
                for (x, (&b, &d)) in kernels.x.iter_mut().zip(base.iter().zip(&odo.digits)) {
                    *x = b + p * d;
                }
                *map.entry(kernels.key()).or_insert(0) += 1;
                odo.advance();
            }
        },
        |a, b| (a.0, merge_maps(a.1, b.1)),
    )
    .1;
    Ok(finish(counts, polys, n, k))
}

pub(super) fn finish(counts: HashMap<u128, u64>, polys: &[PolySpec], n: usize, k: u32) -> ClassCounts {
    let mut out = BTreeMap::new();
    for (key, count) in counts {
        *out.entry(unpack_class(key, polys, n, k)).or_insert(0) += count;
    }
    ClassCounts(out)
}

fn target_exponents(inst: &ProblemInstance) -> Option<Vec<Vec<u32>>> {
    inst.targets()
        .iter()
        .map(|g| g.invariant_exponents(inst.n() as usize))
        .collect()
}

/// Number of lifts `X ≡ X̄ (mod p)` in `Mat_n(Z/p^(N+1))` with
/// `cok(P_j(X)) ≅ G_j` for all `j`.
///
/// Fails with `RankHypothesis` unless `dim_{F_q_j} cok(P_j(X̄)) = r(G_j)`.
pub fn enumerate_lifts(xbar: &RingMatrix, inst: &ProblemInstance, budget: u64) -> Result<u64> {
    let p = inst.p();
    let n = check_residue_matrix(xbar, p)?;
    if n != inst.n() as usize {
        return Err(Error::Shape(format!("residue matrix is {n}x{n}, instance has n = {}", inst.n())));
    }
    for (j, (corank, g)) in residue_coranks(xbar, inst.polys())?.into_iter().zip(inst.targets()).enumerate() {
        if corank != g.residue_rank() {
            return Err(Error::RankHypothesis {
                index: j,
                expected: g.residue_rank(),
                found: corank,
            });
        }
    }
    let k = inst.big_n() + 1;
    let total = check_budget(pow_u128(p, inst.big_n() as u64 * (n * n) as u64), budget)?;
    let Some(targets) = target_exponents(inst) else {
        return Ok(0);
    };
    let radix = p.pow(inst.big_n());
    let base = xbar.raw().to_vec();
    let polys = inst.polys();
    Ok(par_chunks(
        total,
        || (Kernels::new(polys, k, n), 0u64),
        |(kernels, hits), start, end| {
            let mut odo = Odometer::new(start, radix, n * n);
            for _ in start..end {
                for (x, (&b, &d)) in kernels.x.iter_mut().zip(base.iter().zip(&odo.digits)) {
                    *x = b + p * d;
                }
                if kernels.matches(&targets) {
                    *hits += 1;
                }
                odo.advance();
            }
        },
        |a, b| (a.0, a.1 + b.1),
    )
    .1)
}

/// Counts over all of `Mat_n(Z/p^(N+1))`, plus the residue-level count
/// `#{X̄ ∈ Mat_n(F_p) : cok(P_j(X̄)) ≅ G_j / p G_j for all j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullCount {
    pub count: u64,
    pub total: u64,
    pub residue_count: u64,
    pub residue_total: u64,
}

pub fn enumerate_full(inst: &ProblemInstance, budget: u64) -> Result<FullCount> {
    let p = inst.p();
    let n = inst.n() as usize;
    if n == 0 {
        return Err(Error::Shape("n must be positive".into()));
    }
    let k = inst.big_n() + 1;
    let total = check_budget(pow_u128(p, k as u64 * (n * n) as u64), budget)?;
    let residue_total = p.pow((n * n) as u32);
    let polys = inst.polys();
    let ranks: Vec<u32> = inst.targets().iter().map(|g| g.residue_rank()).collect();
    let residue_count = residue_rank_census(p, n, polys, budget)?.get(&ranks);
    let Some(targets) = target_exponents(inst) else {
        return Ok(FullCount {
            count: 0,
            total,
            residue_count,
            residue_total,
        });
    };
    let radix = p.pow(k);
    let count = par_chunks(
        total,
        || (Kernels::new(polys, k, n), 0u64),
        |(kernels, hits), start, end| {
            let mut odo = Odometer::new(start, radix, n * n);
            for _ in start..end {
                kernels.x.copy_from_slice(&odo.digits);
                if kernels.matches(&targets) {
                    *hits += 1;
                }
                odo.advance();
            }
        },
        |a, b| (a.0, a.1 + b.1),
    )
    .1;
    Ok(FullCount {
        count,
        total,
        residue_count,
        residue_total,
    })
}

/// Joint residue coranks `(dim_{F_q_j} cok(P_j(X̄)))_j` over `Mat_n(F_p)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankCensus(pub BTreeMap<Vec<u32>, u64>);

impl RankCensus {
    pub fn get(&self, ranks: &[u32]) -> u64 {
        self.0.get(ranks).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    /// Projection onto polynomial `j`.
    pub fn marginal(&self, j: usize) -> RankCensus {
        let mut out = BTreeMap::new();
        for (ranks, &c) in &self.0 {
            *out.entry(vec![ranks[j]]).or_insert(0) += c;
        }
        RankCensus(out)
    }
}

#[derive(Serialize, Deserialize)]
struct RankRow {
    ranks: Vec<u32>,
    count: u64,
}

impl Serialize for RankCensus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<RankRow> = self
            .0
            .iter()
            .map(|(ranks, &count)| RankRow {
                ranks: ranks.clone(),
                count,
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RankCensus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<RankRow>::deserialize(d)?;
        Ok(RankCensus(rows.into_iter().map(|r| (r.ranks, r.count)).collect()))
    }
}

pub fn residue_rank_census(p: u64, n: usize, polys: &[PolySpec], budget: u64) -> Result<RankCensus> {
    validate_polys(p, polys)?;
    if n == 0 {
        return Err(Error::Shape("n must be positive".into()));
    }
    ChainRing::integers(p, 1)?;
    let total = check_budget(pow_u128(p, (n * n) as u64), budget)?;
    let l = polys.len();
    let counts = par_chunks(
        total,
        || (Kernels::new(polys, 1, n), HashMap::<Vec<u32>, u64>::default()),
        |(kernels, map), start, end| {
            let mut odo = Odometer::new(start, p, n * n);
            let mut ranks = vec![0u32; l];
            for _ in start..end {
                kernels.x.copy_from_slice(&odo.digits);
                for (j, kernel) in kernels.lee.iter_mut().enumerate() {
                    kernel.exponents(&kernels.x, &mut kernels.exps);
                    ranks[j] = kernels.exps.iter().filter(|&&e| e >= 1).count() as u32;
                }
                match map.get_mut(&ranks) {
                    Some(c) => *c += 1,
                    None => {
                        map.insert(ranks.clone(), 1);
                    }
                }
                odo.advance();
            }
        },
        |a, b| (a.0, merge_maps(a.1, b.1)),
    )
    .1;
    Ok(RankCensus(counts.into_iter().collect()))
}

/// Number of `n x n` matrices over `F_q` of each rank `0..=n`, by exhaustion.
pub fn matrix_rank_census(q: u64, n: usize, budget: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::Shape("n must be positive".into()));
    }
    let (p, d) = prime_power_parts(q)?;
    let field = if d == 1 {
        ChainRing::integers(p, 1)?
    } else {
        ChainRing::extension(&PolySpec::first_irreducible(p, d as usize)?, 1)?
    };
    let total = check_budget(pow_u128(q, (n * n) as u64), budget)?;
    let len = n * n * d as usize;
    Ok(par_chunks(
        total,
        || vec![0u64; n + 1],
        |census, start, end| {
            let mut odo = Odometer::new(start, p, len);
            for _ in start..end {
                let x = RingMatrix::from_raw(&field, n, n, odo.digits.clone()).expect("shape matches");
                census[x.residue_rank()] += 1;
                odo.advance();
            }
        },
        |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
    ))
}

/// Joint class histogram over all of `Mat_n(Z/p^(N+1))` together with the
/// residue census, for checking every target at once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FullCensus {
    pub classes: ClassCounts,
    pub residue: RankCensus,
    pub total: u64,
    pub residue_total: u64,
}

pub fn full_census(p: u64, n: usize, big_n: u32, polys: &[PolySpec], budget: u64) -> Result<FullCensus> {
    validate_polys(p, polys)?;
    if n == 0 {
        return Err(Error::Shape("n must be positive".into()));
    }
    let k = big_n + 1;
    check_packable(polys, n, k)?;
    ChainRing::integers(p, k)?;
    let total = check_budget(pow_u128(p, k as u64 * (n * n) as u64), budget)?;
    let radix = p.pow(k);
    let counts = par_chunks(
        total,
        || (Kernels::new(polys, k, n), HashMap::<u128, u64>::default()),
        |(kernels, map), start, end| {
            let mut odo = Odometer::new(start, radix, n * n);
            for _ in start..end {
                kernels.x.copy_from_slice(&odo.digits);
                *map.entry(kernels.key()).or_insert(0) += 1;
                odo.advance();
            }
        },
        |a, b| (a.0, merge_maps(a.1, b.1)),
    )
    .1;
    Ok(FullCensus {
        classes: finish(counts, polys, n, k),
        residue: residue_rank_census(p, n, polys, budget)?,
        total,
        residue_total: p.pow((n * n) as u32),
    })
}

/// Number of `X ∈ Mat_n(R_(N+1))` with `X ≡ X̄` mod `p` and
/// `cok(X - α I) ≅ G`, for `R` an unramified extension of `Z_p`.
///
/// `xbar` lives over the residue field of `R`, `alpha` over `R_(N+1)`.
pub fn enumerate_dvr_lifts(
    xbar: &RingMatrix,
    alpha: &ChainRingElement,
    target: &ModuleType,
    budget: u64,
) -> Result<u64> {
    let ring = alpha.ring().clone();
    if xbar.ring() != &ring.residue_field() {
        return Err(Error::RingMismatch(format!(
            "residue matrix over {} but alpha over {ring}",
            xbar.ring()
        )));
    }
    if !xbar.is_square() || xbar.rows() == 0 {
        return Err(Error::Shape("residue matrix must be square and nonempty".into()));
    }
    let n = xbar.rows();
    let d = ring.degree();
    let big_n = ring.k() - 1;
    let p = ring.p();
    let total = check_budget(pow_u128(p, big_n as u64 * (n * n * d) as u64), budget)?;
    let Some(want) = target.invariant_exponents(n) else {
        return Ok(0);
    };
    if target.residue_degree() as usize != d {
        return Err(Error::InvalidInstance(format!(
            "target has residue degree {}, ring has {d}",
            target.residue_degree()
        )));
    }
    let base = xbar.raw().to_vec();
    let alpha = alpha.coords().to_vec();
    let radix = p.pow(big_n);
    Ok(par_chunks(
        total,
        || (vec![0u64; n * n * d], vec![0u32; n], 0u64),
        |(buf, exps, hits), start, end| {
            let mut odo = Odometer::new(start, radix, n * n * d);
            let mut diag = vec![0u64; d];
            for _ in start..end {
                for (x, (&b, &dig)) in buf.iter_mut().zip(base.iter().zip(&odo.digits)) {
                    *x = b + p * dig;
                }
                for i in 0..n {
                    let at = (i * n + i) * d;
                    diag.copy_from_slice(&buf[at..at + d]);
                    ring.sub_into(&diag, &alpha, &mut buf[at..at + d]);
                }
                exponents_in_place(&ring, n, n, buf, exps);
                if *exps == want {
                    *hits += 1;
                }
                odo.advance();
            }
        },
        |a, b| (a.0, a.1, a.2 + b.2),
    )
    .2)
}

/// Every residue matrix in `Mat_n(F_p)`, in index order.
pub(crate) fn all_residue_matrices(p: u64, n: usize) -> Result<Vec<RingMatrix>> {
    let ring = ChainRing::integers(p, 1)?;
    let total = check_budget(pow_u128(p, (n * n) as u64), 1 << 24)?;
    (0..total)
        .map(|i| RingMatrix::from_raw(&ring, n, n, digits_base(i, p, n * n)))
        .collect()
}

/// Residue matrices satisfying the rank hypothesis of an instance.
pub(crate) fn admissible_residues(inst: &ProblemInstance) -> Result<Vec<RingMatrix>> {
    let ranks: Vec<u32> = inst.targets().iter().map(|g| g.residue_rank()).collect();
    let mut out = Vec::new();
    for xbar in all_residue_matrices(inst.p(), inst.n() as usize)? {
        if residue_coranks(&xbar, inst.polys())? == ranks {
            out.push(xbar);
        }
    }
    Ok(out)
}

pub(crate) fn joint_class_of(inst: &ProblemInstance) -> JointClass {
    JointClass::Modules(inst.targets().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::main3_count;
    use num_bigint::BigUint;

    fn f2(n: usize, v: &[i64]) -> RingMatrix {
        RingMatrix::from_ints(&ChainRing::integers(2, 1).unwrap(), n, n, v).unwrap()
    }

    const BIG: u64 = 1 << 26;

    #[test]
    fn lift_examples() {
        let inst = ProblemInstance::parse(2, &["0,1"], &["1^1"], 1, 1).unwrap();
        assert_eq!(enumerate_lifts(&f2(1, &[0]), &inst, BIG).unwrap(), 1);
        let quad = ProblemInstance::parse(2, &["1,1,1"], &["1^1"], 2, 1).unwrap();
        assert_eq!(enumerate_lifts(&f2(2, &[0, 1, 1, 1]), &quad, BIG).unwrap(), 12);
        let joint = ProblemInstance::parse(2, &["0,1", "-1,1"], &["1^1", "1^1"], 2, 1).unwrap();
        assert_eq!(enumerate_lifts(&f2(2, &[0, 0, 0, 1]), &joint, BIG).unwrap(), 4);
    }

    #[test]
    fn rank_hypothesis_is_checked() {
        let inst = ProblemInstance::parse(2, &["0,1"], &["1^1"], 2, 1).unwrap();
        assert!(matches!(
            enumerate_lifts(&f2(2, &[1, 0, 0, 1]), &inst, BIG),
            Err(Error::RankHypothesis { index: 0, expected: 1, found: 0 })
        ));
        assert!(matches!(
            enumerate_lifts(&f2(2, &[0, 1, 0, 0]), &inst, 8),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn census_partitions_lifts() {
        let polys = [PolySpec::identity(2).unwrap()];
        let xbar = f2(2, &[0, 1, 0, 0]);
        let census = lift_census(&xbar, &polys, 2, BIG).unwrap();
        assert_eq!(census.total(), 1 << 8);
        for (class, &count) in census.iter() {
            if let Some([g]) = class.modules() {
                let inst = ProblemInstance::new(2, polys.to_vec(), vec![g.clone()], 2, 2).unwrap();
                assert_eq!(BigUint::from(count), main3_count(&inst), "{g}");
            }
        }
    }

    #[test]
    fn full_examples() {
        let one = ProblemInstance::parse(2, &["0,1"], &["1^1"], 1, 1).unwrap();
        let full = enumerate_full(&one, BIG).unwrap();
        assert_eq!((full.count, full.total), (1, 4));
        let inv = ProblemInstance::parse(2, &["0,1"], &["0"], 2, 1).unwrap();
        let full = enumerate_full(&inv, BIG).unwrap();
        assert_eq!((full.count, full.total), (96, 256));
        assert_eq!(full.residue_count, 6);
    }

    #[test]
    fn full_is_sum_of_lifts() {
        let inst = ProblemInstance::parse(2, &["0,1", "1,1,1"], &["1^1", "0"], 2, 1).unwrap();
        let full = enumerate_full(&inst, BIG).unwrap();
        let by_residue: u64 = admissible_residues(&inst)
            .unwrap()
            .iter()
            .map(|x| enumerate_lifts(x, &inst, BIG).unwrap())
            .sum();
        assert_eq!(full.count, by_residue);
        let census = full_census(2, 2, 1, inst.polys(), BIG).unwrap();
        assert_eq!(census.classes.get(&joint_class_of(&inst)), full.count);
        assert_eq!(census.classes.total(), 256);
    }

    #[test]
    fn residue_census_examples() {
        let t = [PolySpec::identity(2).unwrap()];
        let census = residue_rank_census(2, 2, &t, BIG).unwrap();
        assert_eq!(census.0, BTreeMap::from([(vec![0], 6), (vec![1], 9), (vec![2], 1)]));
        let quad = [PolySpec::parse("1,1,1", 2).unwrap()];
        let census = residue_rank_census(2, 2, &quad, BIG).unwrap();
        let singular = all_residue_matrices(2, 2)
            .unwrap()
            .iter()
            .filter(|x| !x.poly_eval(&quad[0]).unwrap().is_invertible())
            .count() as u64;
        assert_eq!(census.get(&[1]), singular);
        assert_eq!(census.total(), 16);
        let both = [t[0].clone(), quad[0].clone()];
        let joint = residue_rank_census(2, 2, &both, BIG).unwrap();
        assert_eq!(joint.marginal(0), residue_rank_census(2, 2, &t, BIG).unwrap());
        assert_eq!(joint.marginal(1), census);
    }

    #[test]
    fn dvr_example() {
        let poly = PolySpec::parse("1,1,1", 2).unwrap();
        let r2 = ChainRing::extension(&poly, 2).unwrap();
        let xbar = RingMatrix::zeros(&r2.residue_field(), 1, 1);
        let g = ModuleType::parse("1^1", 2).unwrap();
        assert_eq!(enumerate_dvr_lifts(&xbar, &r2.zero(), &g, BIG).unwrap(), 3);
    }

    #[test]
    fn serde_round_trips() {
        let polys = [PolySpec::identity(2).unwrap()];
        let census = full_census(2, 1, 1, &polys, BIG).unwrap();
        let json = serde_json::to_string(&census).unwrap();
        assert_eq!(serde_json::from_str::<FullCensus>(&json).unwrap(), census);
        assert!(census.classes.get(&JointClass::Overflow) > 0);
    }
}
