use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{probe_conjecture, sample_joint_distribution, sampled_report, Budget, ExperimentReport, SamplerConfig};
use crate::error::Result;
use crate::experiments::enumerate::joint_class_of;
use crate::formulas::{main_limit, ProblemInstance};
use crate::matrix::RingMatrix;
use crate::ring::ChainRing;

/// How one sweep entry is run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    /// Lifts of one residue matrix, written `"a,b;c,d"` over `F_p`.
    Lifts { residue: String },
    Full,
    Sample {
        seed: u64,
        samples: u64,
        #[serde(default)]
        tolerance: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    #[serde(default)]
    pub name: Option<String>,
    pub instance: ProblemInstance,
    #[serde(flatten)]
    pub mode: SweepMode,
    #[serde(default)]
    pub budget: Option<u64>,
}

/// A declarative list of experiments, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub entries: Vec<SweepEntry>,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::Parse(e.to_string()))
    }
}

pub fn run_sweep(config: &SweepConfig, default_budget: Budget) -> Result<Vec<ExperimentReport>> {
    let workers = config.workers.unwrap_or_else(super::default_workers);
    let mut out = Vec::with_capacity(config.entries.len());
    for entry in &config.entries {
        let budget = entry.budget.map(Budget::uniform).unwrap_or(default_budget);
        let inst = &entry.instance;
        let mut report = match &entry.mode {
            SweepMode::Lifts { residue } => {
                let f_p = ChainRing::integers(inst.p(), 1)?;
                let xbar = RingMatrix::parse(&f_p, residue)?;
                super::with_workers(workers, || probe_conjecture(inst, Some(&xbar), budget))?
            }
            SweepMode::Full => super::with_workers(workers, || probe_conjecture(inst, None, budget))?,
            SweepMode::Sample {
                seed,
                samples,
                tolerance,
            } => {
                let started = Instant::now();
                let cfg = SamplerConfig {
                    seed: *seed,
                    samples: *samples,
                    workers,
                };
                let table = sample_joint_distribution(inst.p(), inst.n() as usize, inst.big_n(), inst.polys(), &cfg)?;
                let limit = main_limit(inst, tolerance.unwrap_or(1e-12));
                sampled_report(&table, &joint_class_of(inst), limit, 0.0, started)
            }
        };
        if let Some(name) = &entry.name {
            report.notes.insert(0, format!("name: {name}"));
        }
        out.push(report);
    }
    Ok(out)
}
