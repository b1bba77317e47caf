use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::parse_rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "exact-match")]
    ExactMatch,
    #[serde(rename = "within-3sigma")]
    Within3Sigma,
    #[serde(rename = "MISMATCH")]
    Mismatch,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::ExactMatch => "exact-match",
            Verdict::Within3Sigma => "within-3sigma",
            Verdict::Mismatch => "MISMATCH",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observed {
    /// An exact count out of `total` matrices, as decimal strings.
    Count { count: String, total: String },
    Frequency { hits: u64, samples: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicted {
    /// An exact count (or probability, for frequencies) as `"a"` or `"a/b"`.
    Exact { value: String },
    Limit { value: f64, truncation_index: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub instance: String,
    pub mode: String,
    pub observed: Observed,
    pub predicted: Predicted,
    pub verdict: Verdict,
    /// Acceptance half-width for frequencies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ExperimentReport {
    /// The verdict implied by `observed`, `predicted` and `band`.
    pub fn recompute_verdict(&self) -> Result<Verdict> {
        match (&self.observed, &self.predicted) {
            (Observed::Count { count, .. }, Predicted::Exact { value }) => {
                let ok = parse_rational(count)? == parse_rational(value)?;
                Ok(if ok { Verdict::ExactMatch } else { Verdict::Mismatch })
            }
            (Observed::Frequency { hits, samples }, predicted) => {
                let target = match predicted {
                    Predicted::Limit { value, .. } => *value,
                    Predicted::Exact { value } => {
                        let r = parse_rational(value)?;
                        num_traits::ToPrimitive::to_f64(&r).unwrap_or(f64::NAN)
                    }
                };
                let band = self.band.unwrap_or_else(|| three_sigma(target, *samples));
                let freq = *hits as f64 / (*samples).max(1) as f64;
                Ok(if (freq - target).abs() <= band {
                    Verdict::Within3Sigma
                } else {
                    Verdict::Mismatch
                })
            }
            (Observed::Count { .. }, Predicted::Limit { .. }) => {
                Err(Error::InvalidInstance("an exact count cannot be judged against a limit".into()))
            }
        }
    }

    pub fn observed_value(&self) -> String {
        match &self.observed {
            Observed::Count { count, total } => format!("{count}/{total}"),
            Observed::Frequency { hits, samples } => format!("{hits}/{samples}"),
        }
    }

    pub fn predicted_value(&self) -> String {
        match &self.predicted {
            Predicted::Exact { value } => value.clone(),
            Predicted::Limit { value, .. } => format!("{value:.10}"),
        }
    }

    pub const CSV_HEADER: [&'static str; 8] =
        ["instance", "mode", "observed", "predicted", "verdict", "band", "runtime_ms", "seed"];

    fn csv_record(&self) -> [String; 8] {
        [
            self.instance.clone(),
            self.mode.clone(),
            self.observed_value(),
            self.predicted_value(),
            self.verdict.to_string(),
            self.band.map(|b| b.to_string()).unwrap_or_default(),
            format!("{:.3}", self.runtime_ms),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }

    /// Writes reports as CSV with one header line.
    pub fn write_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Unsupported(format!("csv output failed: {e}"));
        w.write_record(Self::CSV_HEADER).map_err(io)?;
        for r in reports {
            w.write_record(r.csv_record()).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Unsupported(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// `3 sqrt(v (1 - v) / samples)`.
pub fn three_sigma(value: f64, samples: u64) -> f64 {
    3.0 * (value * (1.0 - value) / samples.max(1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(observed: Observed, predicted: Predicted, band: Option<f64>) -> ExperimentReport {
        ExperimentReport {
            instance: "x".into(),
            mode: "test".into(),
            observed,
            predicted,
            verdict: Verdict::Mismatch,
            band,
            runtime_ms: 0.0,
            seed: None,
            notes: vec![],
        }
    }

    #[test]
    fn verdicts() {
        let exact = report(
            Observed::Count { count: "12".into(), total: "16".into() },
            Predicted::Exact { value: "12".into() },
            None,
        );
        assert_eq!(exact.recompute_verdict().unwrap(), Verdict::ExactMatch);
        let off = report(
            Observed::Frequency { hits: 300, samples: 1000 },
            Predicted::Limit { value: 0.2, truncation_index: 30 },
            None,
        );
        assert_eq!(off.recompute_verdict().unwrap(), Verdict::Mismatch);
        let near = report(
            Observed::Frequency { hits: 210, samples: 1000 },
            Predicted::Exact { value: "1/5".into() },
            None,
        );
        assert_eq!(near.recompute_verdict().unwrap(), Verdict::Within3Sigma);
    }

    #[test]
    fn csv_and_json() {
        let r = report(
            Observed::Count { count: "4".into(), total: "16".into() },
            Predicted::Exact { value: "4".into() },
            None,
        );
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentReport>(&json).unwrap(), r);
        let mut buf = Vec::new();
        ExperimentReport::write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("instance,mode,observed"));
    }
}
