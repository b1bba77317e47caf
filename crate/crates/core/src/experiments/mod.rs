//! Exhaustive enumeration and Monte Carlo engines.
//!
//! Every engine splits its index space into fixed chunks and merges chunk
//! results by integer addition, so output never depends on the number of
//! worker threads.

mod enumerate;
mod probe;
mod report;
mod sample;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::module::ModuleType;
use crate::ring::PolySpec;

pub use enumerate::{
    enumerate_dvr_lifts, enumerate_full, enumerate_lifts, full_census, lift_census, matrix_rank_census,
    residue_rank_census,
    FullCensus, FullCount, RankCensus,
};
pub(crate) use enumerate::{admissible_residues, all_residue_matrices};
pub use probe::probe_conjecture;
pub use report::{ExperimentReport, Observed, Predicted, Verdict};
pub use sample::{sample_joint_distribution, sampled_report, SampleTable};
pub use sweep::{run_sweep, SweepConfig, SweepEntry, SweepMode};

/// Default cap on the number of matrices one lift enumeration visits.
pub const DEFAULT_LIFT_BUDGET: u64 = 1 << 24;
/// Default cap for enumerations over all of `Mat_n(Z/p^(N+1))`.
pub const DEFAULT_FULL_BUDGET: u64 = 1 << 26;
/// Overrides both defaults when set to a positive integer.
pub const BUDGET_ENV: &str = "COKERNELS_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub lifts: u64,
    pub full: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            lifts: DEFAULT_LIFT_BUDGET,
            full: DEFAULT_FULL_BUDGET,
        }
    }
}

impl Budget {
    pub fn uniform(limit: u64) -> Self {
        Budget {
            lifts: limit,
            full: limit,
        }
    }

    /// The defaults, or a uniform budget from `COKERNELS_BUDGET`.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .filter(|&v| v > 0)
            .map(Budget::uniform)
            .unwrap_or_default()
    }
}

pub(crate) fn check_budget(needed: u128, budget: u64) -> Result<u64> {
    if needed > budget as u128 {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(needed as u64)
    }
}

/// `base^exp` as `u128`, saturating.
pub(crate) fn pow_u128(base: u64, exp: u64) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: u64,
    pub workers: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            samples: 10_000,
            workers: default_workers(),
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// The tuple `(cok(P_j(X)))_j`, or `Overflow` when any component has an
/// exponent that reaches the working precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JointClass {
    Modules(Vec<ModuleType>),
    Overflow,
}

impl JointClass {
    pub fn modules(&self) -> Option<&[ModuleType]> {
        match self {
            JointClass::Modules(m) => Some(m),
            JointClass::Overflow => None,
        }
    }
}

impl fmt::Display for JointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JointClass::Modules(ms) => {
                let parts: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
                write!(f, "({})", parts.join(" | "))
            }
            JointClass::Overflow => f.write_str("overflow"),
        }
    }
}

impl Serialize for JointClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            JointClass::Modules(ms) => ms.serialize(s),
            JointClass::Overflow => s.serialize_str("overflow"),
        }
    }
}

impl<'de> Deserialize<'de> for JointClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Tag(String),
            Modules(Vec<ModuleType>),
        }
        match Repr::deserialize(d)? {
            Repr::Modules(ms) => Ok(JointClass::Modules(ms)),
            Repr::Tag(t) if t == "overflow" => Ok(JointClass::Overflow),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unknown class {t:?}"))),
        }
    }
}

/// A histogram of joint classes, serialized as a list of
/// `{ "class": ..., "count": ... }` rows.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassCounts(pub BTreeMap<JointClass, u64>);

impl ClassCounts {
    pub fn get(&self, class: &JointClass) -> u64 {
        self.0.get(class).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&JointClass, &u64)> {
        self.0.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct ClassRow {
    class: JointClass,
    count: u64,
}

impl Serialize for ClassCounts {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<ClassRow> = self
            .0
            .iter()
            .map(|(class, &count)| ClassRow {
                class: class.clone(),
                count,
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClassCounts {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<ClassRow>::deserialize(d)?;
        Ok(ClassCounts(rows.into_iter().map(|r| (r.class, r.count)).collect()))
    }
}

/// Packs per-polynomial SNF exponent vectors into one hashable key.
pub(crate) const KEY_BITS: u32 = 5;
pub(crate) const KEY_SLOTS: usize = (128 / KEY_BITS) as usize;

#[inline]
pub(crate) fn pack(key: u128, e: u32) -> u128 {
    (key << KEY_BITS) | e as u128
}

/// Inverse of [`pack`] over `polys.len()` vectors of length `n`.
pub(crate) fn unpack_class(mut key: u128, polys: &[PolySpec], n: usize, k: u32) -> JointClass {
    let slots = polys.len() * n;
    let mut exps = vec![0u32; slots];
    for slot in (0..slots).rev() {
        exps[slot] = (key & ((1 << KEY_BITS) - 1)) as u32;
        key >>= KEY_BITS;
    }
    if exps.iter().any(|&e| e >= k) {
        return JointClass::Overflow;
    }
    JointClass::Modules(
        polys
            .iter()
            .zip(exps.chunks(n))
            .map(|(poly, e)| ModuleType::from_invariant_exponents(e, poly.degree() as u32))
            .collect(),
    )
}

pub(crate) fn check_packable(polys: &[PolySpec], n: usize, k: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Shape("n must be positive".into()));
    }
    if polys.len() * n > KEY_SLOTS || k >= 1 << KEY_BITS {
        return Err(Error::Unsupported(format!(
            "census over {} polynomials at n = {n}, k = {k}",
            polys.len()
        )));
    }
    Ok(())
}
