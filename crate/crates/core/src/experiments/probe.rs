use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;

use super::{enumerate_full, enumerate_lifts, Budget, ExperimentReport, Observed, Predicted, Verdict};
use crate::error::Result;
use crate::formulas::{main2_factor, main3_count, rational_text, ProblemInstance};
use crate::matrix::RingMatrix;

/// Largest degree the proven results cover.
pub const PROVED_MAX_DEGREE: usize = 2;

/// Compares an enumeration with the lift-count formula, for polynomials of
/// any degree.
///
/// With a residue matrix, counts its lifts against the closed form. Without
/// one, counts over all of `Mat_n(Z/p^(N+1))` and compares with
/// `factor * (residue count) * p^(N n^2)`. The verdict is evidence only.
pub fn probe_conjecture(inst: &ProblemInstance, xbar: Option<&RingMatrix>, budget: Budget) -> Result<ExperimentReport> {
    let started = Instant::now();
    let regime = if inst.polys().iter().all(|p| p.degree() <= PROVED_MAX_DEGREE) {
        "proved regime: all degrees at most 2"
    } else {
        "conjecture regime: some degree above 2"
    };
    let mut notes = vec![regime.to_string()];
    notes.extend(inst.warnings().iter().map(|w| w.to_string()));
    let (mode, observed, predicted) = match xbar {
        Some(xbar) => {
            let count = enumerate_lifts(xbar, inst, budget.lifts)?;
            let total = BigUint::from(inst.p()).pow(inst.big_n() * inst.n() * inst.n());
            notes.push(format!("residue matrix {}", xbar.to_text()));
            (
                "lifts",
                Observed::Count {
                    count: count.to_string(),
                    total: total.to_string(),
                },
                rational_text(&BigRational::from_integer(main3_count(inst).into())),
            )
        }
        None => {
            let full = enumerate_full(inst, budget.full)?;
            let lifts_per_residue = BigUint::from(inst.p()).pow(inst.big_n() * inst.n() * inst.n());
            let predicted = main2_factor(inst)
                * BigRational::from_integer((lifts_per_residue * full.residue_count).into());
            notes.push(format!("residue count {} of {}", full.residue_count, full.residue_total));
            (
                "full",
                Observed::Count {
                    count: full.count.to_string(),
                    total: full.total.to_string(),
                },
                rational_text(&predicted),
            )
        }
    };
    let mut report = ExperimentReport {
        instance: inst.describe(),
        mode: mode.into(),
        observed,
        predicted: Predicted::Exact { value: predicted },
        verdict: Verdict::Mismatch,
        band: None,
        runtime_ms: 0.0,
        seed: None,
        notes,
    };
    report.verdict = report.recompute_verdict()?;
    report.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
