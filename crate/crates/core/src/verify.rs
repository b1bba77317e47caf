//! The acceptance suite: each criterion checks a closed form against an
//! independent enumeration, or a structural identity on random inputs.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiments::{
    enumerate_full, enumerate_lifts, full_census, lift_census, matrix_rank_census, probe_conjecture, sample_joint_distribution,
    sampled_report, with_workers, Budget, ExperimentReport, JointClass, SamplerConfig, Verdict,
};
use crate::experiments::{admissible_residues, all_residue_matrices};
use crate::formulas::{aut_count_formula, main2_factor, main3_count, main_limit, rank_count_formula, ProblemInstance};
use crate::matrix::RingMatrix;
use crate::module::{brute_force_aut_count, prime_power_parts, ModuleType, ORACLE_MAX_ORDER};
use crate::random::{random_block_op, random_irreducible, random_matrix, random_partition, random_structured_matrix};
use crate::ring::{ChainRing, PolySpec};
use crate::snf::{cokernel_via_lee_exponents, minor_gcd_valuations, smith_normal_form};

/// Acceptance half-width floor for the sampled limits, covering the
/// `O(2^-n)` finite-size bias at `n = 8`.
pub const SAMPLE_BAND_FLOOR: f64 = 0.005;
pub const SAMPLE_COUNT: u64 = 1_000_000;
pub const SAMPLE_SEED: u64 = 20_240_601;
pub const RANDOM_SEED: u64 = 0x5eed;
pub const RANDOM_CASES: usize = 1000;
/// Tolerance for the truncated infinite products.
pub const LIMIT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    /// Non-blocking criteria are reported but never fail the suite.
    pub blocking: bool,
    pub detail: String,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<ExperimentReport>,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.passed, self.blocking) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        };
        write!(
            f,
            "[{status}] {:>2} {}: {} ({:.1}s)",
            self.id,
            self.title,
            self.detail,
            self.runtime_ms / 1e3
        )
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Scoreboard {
    pub outcomes: Vec<CriterionOutcome>,
}

impl Scoreboard {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed || !o.blocking)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub workers: usize,
    pub budget: Budget,
    pub samples: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            workers: crate::experiments::default_workers(),
            budget: Budget::default(),
            samples: SAMPLE_COUNT,
            seed: SAMPLE_SEED,
        }
    }
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "lift count, degree one"),
    (2, "lift count, degree two"),
    (3, "lift count, joint"),
    (4, "independence of the residue matrix"),
    (5, "constant-multiple identity"),
    (6, "automorphism counts"),
    (7, "rank counts"),
    (8, "cokernel transport"),
    (9, "invariant factors and block operations"),
    (10, "limiting probabilities, sampled"),
    (11, "conjecture probe, cubic"),
];

pub fn run_all(opts: &VerifyOptions) -> Scoreboard {
    Scoreboard {
        outcomes: CRITERIA.iter().map(|&(id, _)| run_criterion(id, opts)).collect(),
    }
}

/// Runs one criterion by number.
pub fn run_criterion(id: u32, opts: &VerifyOptions) -> CriterionOutcome {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown criterion")
        .to_string();
    let started = Instant::now();
    let result = with_workers(opts.workers, || match id {
        1 => criterion_1(opts),
        2 => criterion_2(opts),
        3 => criterion_3(opts),
        4 => criterion_4(opts),
        5 => criterion_5(opts),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(opts),
        11 => criterion_11(opts),
        _ => Ok(Check::fail(format!("no criterion {id}"))),
    });
    let check = result.unwrap_or_else(|e| Check::fail(format!("error: {e}")));
    CriterionOutcome {
        id,
        title,
        passed: check.failures.is_empty(),
        blocking: id != 11,
        detail: check.summary(),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        reports: check.reports,
    }
}

/// Accumulates passed cases and failure messages.
#[derive(Default)]
struct Check {
    cases: u64,
    failures: Vec<String>,
    notes: Vec<String>,
    reports: Vec<ExperimentReport>,
}

impl Check {
    fn fail(msg: String) -> Self {
        Check {
            failures: vec![msg],
            ..Check::default()
        }
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failures.len() < 20 {
            self.failures.push(msg());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    fn summary(&self) -> String {
        let mut out = if self.failures.is_empty() {
            format!("{} checks agree", self.cases)
        } else {
            let shown: Vec<&str> = self.failures.iter().filter(|s| !s.is_empty()).map(String::as_str).take(3).collect();
            format!("{} of {} checks failed: {}", self.failures.len(), self.cases, shown.join("; "))
        };
        if !self.notes.is_empty() {
            out.push_str(" [");
            out.push_str(&self.notes.join("; "));
            out.push(']');
        }
        out
    }
}

fn count_lifts(p: u64, big_n: u32, n: usize) -> u128 {
    crate::experiments::pow_u128(p, big_n as u64 * (n * n) as u64)
}

fn criterion_1(opts: &VerifyOptions) -> Result<Check> {
    let mut check = Check::default();
    let worked = ProblemInstance::parse(2, &["0,1"], &["1^1"], 1, 1)?;
    let f2 = ChainRing::integers(2, 1)?;
    let zero = RingMatrix::zeros(&f2, 1, 1);
    check.expect(
        enumerate_lifts(&zero, &worked, opts.budget.lifts)? == 1 && main3_count(&worked) == BigUint::from(1u32),
        || "worked example p=2 N=1 n=1 G=Z/2 is not 1".into(),
    );
    for p in [2u64, 3] {
        let t = PolySpec::identity(p)?;
        for n in 1..=3usize {
            for big_n in 1..=2u32 {
                if count_lifts(p, big_n, n) > opts.budget.lifts as u128 {
                    check.note(format!("p={p} n={n} N={big_n} skipped: {p}^{} lifts per residue exceeds budget", big_n as usize * n * n));
                    continue;
                }
                for xbar in all_residue_matrices(p, n)? {
                    let corank = (n - xbar.residue_rank()) as u32;
                    let census = lift_census(&xbar, std::slice::from_ref(&t), big_n, opts.budget.lifts)?;
                    let expected = ModuleType::all_with_rank(corank, big_n, 1);
                    let mut seen = 0u64;
                    for g in &expected {
                        let inst = ProblemInstance::new(p, vec![t.clone()], vec![g.clone()], n as u32, big_n)?;
                        let count = census.get(&JointClass::Modules(vec![g.clone()]));
                        seen += count;
                        check.expect(BigUint::from(count) == main3_count(&inst), || {
                            format!("p={p} n={n} N={big_n} X̄={} G={g}: counted {count}, formula {}", xbar.to_text(), main3_count(&inst))
                        });
                    }
                    // Whatever is not a listed target must have overflowed.
                    let overflow = census.get(&JointClass::Overflow);
                    check.expect(seen + overflow == census.total(), || {
                        format!("p={p} n={n} N={big_n} X̄={}: lifts land outside the predicted classes", xbar.to_text())
                    });
                }
            }
        }
    }
    Ok(check)
}

fn all_admissible_match(check: &mut Check, inst: &ProblemInstance, budget: u64) -> Result<usize> {
    let formula = main3_count(inst);
    let residues = admissible_residues(inst)?;
    for xbar in &residues {
        let count = enumerate_lifts(xbar, inst, budget)?;
        check.expect(BigUint::from(count) == formula, || {
            format!("{} X̄={}: counted {count}, formula {formula}", inst.describe(), xbar.to_text())
        });
    }
    check.expect(!residues.is_empty(), || format!("{}: no admissible residue matrix", inst.describe()));
    Ok(residues.len())
}

fn criterion_2(opts: &VerifyOptions) -> Result<Check> {
    let mut check = Check::default();
    let quad = ProblemInstance::parse(2, &["1,1,1"], &["1^1"], 2, 1)?;
    let f2 = ChainRing::integers(2, 1)?;
    let companion = RingMatrix::from_ints(&f2, 2, 2, &[0, 1, 1, 1])?;
    let count = enumerate_lifts(&companion, &quad, opts.budget.lifts)?;
    check.expect(count == 12 && main3_count(&quad) == BigUint::from(12u32), || {
        format!("companion lift count {count}, formula {}", main3_count(&quad))
    });
    for (targets, big_n) in [("1^1", 1), ("0", 1), ("1^1", 2), ("2^1", 2), ("0", 2)] {
        let inst = ProblemInstance::parse(2, &["1,1,1"], &[targets], 2, big_n)?;
        all_admissible_match(&mut check, &inst, opts.budget.lifts)?;
    }
    Ok(check)
}

fn criterion_3(opts: &VerifyOptions) -> Result<Check> {
    let mut check = Check::default();
    let joint = ProblemInstance::parse(2, &["0,1", "-1,1"], &["1^1", "1^1"], 2, 1)?;
    let f2 = ChainRing::integers(2, 1)?;
    let diag = RingMatrix::from_ints(&f2, 2, 2, &[0, 0, 0, 1])?;
    let count = enumerate_lifts(&diag, &joint, opts.budget.lifts)?;
    check.expect(count == 4 && main3_count(&joint) == BigUint::from(4u32), || {
        format!("diag(0,1) joint count {count}, formula {}", main3_count(&joint))
    });
    all_admissible_match(&mut check, &joint, opts.budget.lifts)?;
    for n in 2..=3 {
        let mixed = ProblemInstance::parse(2, &["0,1", "1,1,1"], &["0", "1^1"], n, 1)?;
        all_admissible_match(&mut check, &mixed, opts.budget.lifts)?;
    }
    Ok(check)
}

fn criterion_4(opts: &VerifyOptions) -> Result<Check> {
    let mut check = Check::default();
    let inst = ProblemInstance::parse(2, &["0,1"], &["1^1"], 2, 1)?;
    let residues: Vec<RingMatrix> = all_residue_matrices(2, 2)?
        .into_iter()
        .filter(|x| x.residue_rank() == 1)
        .collect();
    check.expect(residues.len() == 9, || format!("{} rank-one residue matrices, expected 9", residues.len()));
    let mut counts = BTreeSet::new();
    for xbar in &residues {
        counts.insert(enumerate_lifts(xbar, &inst, opts.budget.lifts)?);
    }
    check.expect(counts.len() == 1, || format!("distinct counts {counts:?}"));
    check.note(format!("count {:?} over {} residue matrices", counts, residues.len()));
    Ok(check)
}

/// `(p, n, N, polynomials)` instances for the exhaustive identity check.
pub const FULL_INSTANCES: &[(u64, usize, u32, &[&str])] = &[
    (2, 1, 1, &["0,1"]),
    (2, 1, 2, &["0,1"]),
    (2, 2, 1, &["0,1"]),
    (2, 2, 2, &["0,1"]),
    (2, 2, 3, &["0,1"]),
    (2, 2, 4, &["0,1"]),
    (2, 2, 5, &["0,1"]),
    (2, 3, 1, &["0,1"]),
    (3, 1, 1, &["0,1"]),
    (3, 2, 1, &["0,1"]),
    (3, 2, 2, &["0,1"]),
    (3, 2, 3, &["0,1"]),
    (5, 2, 1, &["0,1"]),
    (2, 2, 1, &["0,1", "1,1"]),
    (2, 2, 2, &["0,1", "1,1"]),
    (2, 3, 1, &["0,1", "1,1"]),
    (3, 2, 1, &["0,1", "1,1", "2,1"]),
    (2, 2, 1, &["1,1,1"]),
    (2, 2, 2, &["1,1,1"]),
    (2, 2, 3, &["1,1,1"]),
    (2, 3, 1, &["1,1,1"]),
    (2, 2, 1, &["0,1", "1,1,1"]),
    (2, 3, 1, &["0,1", "1,1,1"]),
    (3, 2, 1, &["1,0,1"]),
    (2, 3, 1, &["1,1,0,1"]),
];

/// Every tuple of targets with exponent at most `big_n` that fits in `n`
/// dimensions for each polynomial separately.
fn target_tuples(polys: &[PolySpec], n: usize, big_n: u32) -> Vec<Vec<ModuleType>> {
    let mut tuples = vec![Vec::new()];
    for poly in polys {
        let d = poly.degree();
        let options: Vec<ModuleType> = (0..=(n / d) as u32)
            .flat_map(|r| ModuleType::all_with_rank(r, big_n, d as u32))
            .collect();
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                options.iter().map(move |g| {
                    let mut t = t.clone();
                    t.push(g.clone());
                    t
                })
            })
            .collect();
    }
    tuples
}

fn criterion_5(opts: &VerifyOptions) -> Result<Check> {
    let mut check = Check::default();
    let mut ran = 0;
    for &(p, n, big_n, texts) in FULL_INSTANCES {
        let polys = texts.iter().map(|s| PolySpec::parse(s, p)).collect::<Result<Vec<_>>>()?;
        let census = match full_census(p, n, big_n, &polys, opts.budget.full) {
            Ok(c) => c,
            Err(crate::Error::BudgetExceeded { .. }) => {
                check.note(format!("p={p} n={n} N={big_n} skipped for budget"));
                continue;
            }
            Err(e) => return Err(e),
        };
        ran += 1;
        let lifts_total = BigUint::from(census.total);
        let residue_total = BigUint::from(census.residue_total);
        for targets in target_tuples(&polys, n, big_n) {
            let inst = ProblemInstance::new(p, polys.clone(), targets.clone(), n as u32, big_n)?;
            let ranks: Vec<u32> = targets.iter().map(|g| g.residue_rank()).collect();
            let count = census.classes.get(&JointClass::Modules(targets.clone()));
            let lhs = BigRational::new(BigUint::from(count).into(), lifts_total.clone().into());
            let residue = BigRational::new(BigUint::from(census.residue.get(&ranks)).into(), residue_total.clone().into());
            let rhs = main2_factor(&inst) * residue;
            check.expect(lhs == rhs, || format!("{}: {lhs} vs {rhs}", inst.describe()));
        }
    }
    // Spot-check the census against the short-circuiting enumerator.
    let inst = ProblemInstance::parse(2, &["0,1", "1,1,1"], &["1^1", "1^1"], 3, 1)?;
    let direct = enumerate_full(&inst, opts.budget.full)?;
    let census = full_census(2, 3, 1, inst.polys(), opts.budget.full)?;
    check.expect(direct.count == census.classes.get(&JointClass::Modules(inst.targets().to_vec())), || {
        "direct enumeration disagrees with the census".into()
    });
    check.note(format!("{ran} exhaustive instances"));
    Ok(check)
}

fn criterion_6() -> Result<Check> {
    let mut check = Check::default();
    for q in [2u64, 3, 4] {
        let (_, d) = prime_power_parts(q)?;
        let mut max_log = 0;
        while q.pow(max_log + 1) <= ORACLE_MAX_ORDER {
            max_log += 1;
        }
        for g in ModuleType::all_up_to_order(max_log, d) {
            let formula = aut_count_formula(&g, q);
            let oracle = brute_force_aut_count(&g, q)?;
            check.expect(formula == oracle, || format!("q={q} G={g}: formula {formula}, oracle {oracle}"));
        }
    }
    Ok(check)
}

fn criterion_7() -> Result<Check> {
    let mut check = Check::default();
    let cases: [(u64, u32); 7] = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (4, 2)];
    for (q, n) in cases {
        let census = matrix_rank_census(q, n as usize, u64::MAX)?;
        let size = q.pow(n * n);
        for (r, &count) in census.iter().enumerate() {
            let formula = rank_count_formula(n, r as u32, q)?;
            check.expect(formula == BigUint::from(count), || format!("q={q} n={n} r={r}: census {count}, formula {formula}"));
        }
        check.expect(census.iter().sum::<u64>() == size, || format!("q={q} n={n}: census does not sum to q^(n^2)"));
    }
    Ok(check)
}

/// `cok(P(X))` over `Z/p^m` and `cok(X - t I)` over `R_m` agree as groups:
/// each `R`-exponent appears `deg P` times among the group exponents.
fn transport_agrees(x: &RingMatrix, poly: &PolySpec) -> Result<bool> {
    let mut group = smith_normal_form(&x.poly_eval(poly)?, false).exponents;
    let mut lee: Vec<u32> = cokernel_via_lee_exponents(x, poly)?
        .into_iter()
        .flat_map(|e| std::iter::repeat_n(e, poly.degree()))
        .collect();
    // Zero exponents carry no information and the counts differ by design.
    group.retain(|&e| e > 0);
    lee.retain(|&e| e > 0);
    group.sort_unstable();
    lee.sort_unstable();
    Ok(group == lee)
}

fn criterion_8() -> Result<Check> {
    let mut check = Check::default();
    let quad = PolySpec::parse("1,1,1", 2)?;
    for m in [2u32, 4] {
        let ring = ChainRing::integers(2, m)?;
        let size = ring.m().pow(4);
        for index in 0..size {
            let x = RingMatrix::from_raw(&ring, 2, 2, crate::ring::digits_base(index, ring.m(), 4))?;
            check.expect(transport_agrees(&x, &quad)?, || format!("m={m} X={}", x.to_text()));
        }
        check.note(format!("{size} exhaustive cases over Z/2^{m}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    for _ in 0..RANDOM_CASES {
        let p = if rng.random_bool(0.5) { 2 } else { 3 };
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=4);
        let poly = random_irreducible(p, 3, m, &mut rng);
        let ring = ChainRing::integers(p, m)?;
        let x = if rng.random_bool(0.5) {
            random_matrix(&ring, n, n, &mut rng)
        } else {
            random_structured_matrix(&ring, n, n, &mut rng)
        };
        check.expect(transport_agrees(&x, &poly)?, || format!("p={p} m={m} P={poly} X={}", x.to_text()));
    }
    Ok(check)
}

/// `d_i = min(v_i - v_(i-1), k)` with `v_i` the capped minor valuations.
fn minors_agree(x: &RingMatrix) -> Result<bool> {
    let snf = smith_normal_form(x, false).exponents;
    let v = minor_gcd_valuations(x)?;
    let k = x.ring().k();
    let from_minors: Vec<u32> = (0..v.len())
        .map(|i| (v[i] - if i == 0 { 0 } else { v[i - 1] }).min(k))
        .collect();
    Ok(snf == from_minors)
}

fn criterion_9() -> Result<Check> {
    let mut check = Check::default();
    let z8 = ChainRing::integers(2, 3)?;
    let r = ChainRing::extension(&PolySpec::parse("1,1,1", 2)?, 2)?;
    let rings = [z8, r];
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED + 9);
    for case in 0..RANDOM_CASES {
        let ring = &rings[case % 2];
        let n = rng.random_range(1..=4);
        let x = if rng.random_bool(0.5) {
            random_matrix(ring, n, n, &mut rng)
        } else {
            random_structured_matrix(ring, n, n, &mut rng)
        };
        check.expect(minors_agree(&x)?, || format!("minors disagree for {x:?}"));
    }
    for case in 0..RANDOM_CASES {
        let ring = &rings[case % 2];
        let n = rng.random_range(1..=4);
        let x = random_structured_matrix(ring, n, n, &mut rng);
        let part = random_partition(n, 3, &mut rng);
        let rows = rng.random_bool(0.5);
        let op = random_block_op(ring, &part, rows, &mut rng);
        let y = if rows {
            x.block_row_op(&part, &op)?
        } else {
            x.block_col_op(&part, &op)?
        };
        let before = smith_normal_form(&x, false).exponents;
        let after = smith_normal_form(&y, false).exponents;
        check.expect(before == after, || format!("{op:?} changed {before:?} to {after:?}"));
        let e = if rows { op.row_matrix(ring, &part)? } else { op.col_matrix(ring, &part)? };
        let product = if rows { e.mul(&x)? } else { x.mul(&e)? };
        check.expect(product == y && e.is_invertible(), || format!("{op:?} is not multiplication by an invertible matrix"));
    }
    Ok(check)
}

fn criterion_10(opts: &VerifyOptions) -> Result<Check> {
    let mut check = Check::default();
    let cfg = SamplerConfig {
        seed: opts.seed,
        samples: opts.samples,
        workers: opts.workers,
    };
    let (n, big_n) = (8usize, 2u32);
    let started = Instant::now();
    let t = PolySpec::identity(2)?;
    let single = sample_joint_distribution(2, n, big_n, std::slice::from_ref(&t), &cfg)?;
    for target in ["0", "1^1"] {
        let inst = ProblemInstance::parse(2, &["0,1"], &[target], n as u32, big_n)?;
        let class = JointClass::Modules(inst.targets().to_vec());
        let report = sampled_report(&single, &class, main_limit(&inst, LIMIT_TOL), SAMPLE_BAND_FLOOR, started);
        check.expect(report.verdict == Verdict::Within3Sigma, || {
            format!("G={target}: {} vs {}", report.observed_value(), report.predicted_value())
        });
        check.reports.push(report);
    }
    let started = Instant::now();
    let polys = [t, PolySpec::parse("-1,1", 2)?];
    let joint = sample_joint_distribution(2, n, big_n, &polys, &cfg)?;
    let inst = ProblemInstance::parse(2, &["0,1", "-1,1"], &["0", "0"], n as u32, big_n)?;
    let class = JointClass::Modules(inst.targets().to_vec());
    let report = sampled_report(&joint, &class, main_limit(&inst, LIMIT_TOL), SAMPLE_BAND_FLOOR, started);
    check.expect(report.verdict == Verdict::Within3Sigma, || {
        format!("joint trivial: {} vs {}", report.observed_value(), report.predicted_value())
    });
    check.reports.push(report);
    let freqs: Vec<String> = check
        .reports
        .iter()
        .map(|r| format!("{} vs {}", r.observed_value(), r.predicted_value()))
        .collect();
    check.note(freqs.join(", "));
    Ok(check)
}

fn criterion_11(opts: &VerifyOptions) -> Result<Check> {
    let mut check = Check::default();
    let cubic = PolySpec::parse("1,1,0,1", 2)?;
    let inst = ProblemInstance::new(2, vec![cubic.clone()], vec![ModuleType::parse("1^1", 3)?], 3, 1)?;
    let xbar = RingMatrix::companion(&ChainRing::integers(2, 1)?, &cubic);
    let report = probe_conjecture(&inst, Some(&xbar), opts.budget)?;
    check.expect(report.verdict == Verdict::ExactMatch, || {
        format!("MISMATCH: counted {}, formula {}", report.observed_value(), report.predicted_value())
    });
    check.note(format!("{} lifts have the target cokernel, formula {}", report.observed_value(), report.predicted_value()));
    check.reports.push(report);
    Ok(check)
}
