#[cfg(test)]
use std::collections::BTreeMap;

use rustc_hash::FxHashMap as HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::enumerate::{finish, par_chunks, validate_polys, Kernels};
use super::report::three_sigma;
use super::{check_packable, with_workers, ClassCounts, ExperimentReport, JointClass, Observed, Predicted, SamplerConfig, Verdict};
use crate::error::Result;
use crate::formulas::LimitValue;
use crate::ring::{ChainRing, PolySpec};

/// Empirical joint distribution of `(cok(P_j(X)))_j` for uniform
/// `X ∈ Mat_n(Z/p^(N+1))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleTable {
    pub p: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: u32,
    pub polys: Vec<String>,
    pub seed: u64,
    pub samples: u64,
    pub counts: ClassCounts,
}

impl SampleTable {
    pub fn hits(&self, class: &JointClass) -> u64 {
        self.counts.get(class)
    }

    pub fn frequency(&self, class: &JointClass) -> f64 {
        self.hits(class) as f64 / self.samples.max(1) as f64
    }
}

/// Draws `cfg.samples` matrices with entries uniform mod `p^(N+1)`.
///
/// Sample `i` uses its own ChaCha stream `(seed, i)`, so the table depends
/// only on the seed and the sample count.
pub fn sample_joint_distribution(
    p: u64,
    n: usize,
    big_n: u32,
    polys: &[PolySpec],
    cfg: &SamplerConfig,
) -> Result<SampleTable> {
    validate_polys(p, polys)?;
    let k = big_n + 1;
    check_packable(polys, n, k)?;
    let m = ChainRing::integers(p, k)?.m();
    let counts = with_workers(cfg.workers, || {
        par_chunks(
            cfg.samples,
            || (Kernels::new(polys, k, n), HashMap::<u128, u64>::default()),
            |(kernels, map), start, end| {
                for index in start..end {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(index);
                    for x in kernels.x.iter_mut() {
                        *x = rng.random_range(0..m);
                    }
                    *map.entry(kernels.key()).or_insert(0) += 1;
                }
            },
            |mut a, b| {
                for (key, v) in b.1 {
                    *a.1.entry(key).or_insert(0) += v;
                }
                a
            },
        )
        .1
    });
    Ok(SampleTable {
        p,
        n,
        big_n,
        polys: polys.iter().map(|p| p.to_string()).collect(),
        seed: cfg.seed,
        samples: cfg.samples,
        counts: finish(counts, polys, n, k),
    })
}

/// Judges the frequency of `class` against a limit, with acceptance
/// half-width `max(3 sigma, floor)`.
pub fn sampled_report(
    table: &SampleTable,
    class: &JointClass,
    predicted: LimitValue,
    floor: f64,
    started: Instant,
) -> ExperimentReport {
    let band = three_sigma(predicted.value, table.samples).max(floor);
    let mut report = ExperimentReport {
        instance: format!(
            "p={} n={} N={} polys={} class={class}",
            table.p,
            table.n,
            table.big_n,
            table.polys.iter().map(|s| format!("[{s}]")).collect::<Vec<_>>().join(" ")
        ),
        mode: "sample".into(),
        observed: Observed::Frequency {
            hits: table.hits(class),
            samples: table.samples,
        },
        predicted: Predicted::Limit {
            value: predicted.value,
            truncation_index: predicted.truncation_index,
        },
        verdict: Verdict::Mismatch,
        band: Some(band),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        seed: Some(table.seed),
        notes: vec![],
    };
    report.verdict = report.recompute_verdict().expect("frequency against limit");
    report
}
