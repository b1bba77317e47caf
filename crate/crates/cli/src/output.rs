//! Output documents and their JSON, CSV and plain renderings.

use std::fmt::Write as _;

use cokernels::experiments::{ExperimentReport, SampleTable};
use cokernels::formulas::ProblemInstance;
use cokernels::verify::Scoreboard;
use cokernels::{CokernelClass, ModuleType};
use serde::{Deserialize, Serialize};

use crate::Format;

pub trait Render {
    fn json(&self) -> Result<String, String>;
    fn csv(&self) -> Result<String, String>;
    fn plain(&self) -> String;

    fn render(&self, format: Format) -> Result<String, String> {
        match format {
            Format::Json => self.json().map(|s| s + "\n"),
            Format::Csv => self.csv(),
            Format::Plain => Ok(self.plain()),
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string_pretty(value).map_err(|e| e.to_string())
}

fn csv_table<I>(header: &[&str], rows: I) -> Result<String, String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for row in rows {
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfOutput {
    pub ring: String,
    pub k: u32,
    /// Exponents `d_i` of the diagonal `p^(d_i)`; `d_i = k` marks a zero entry.
    pub exponents: Vec<u32>,
    pub saturated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cokernel: Option<CokernelClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
}

impl Render for SnfOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &["ring", "k", "exponents", "saturated", "cokernel", "left", "right"],
            [vec![
                self.ring.clone(),
                self.k.to_string(),
                join(&self.exponents, " "),
                self.saturated.to_string(),
                opt(&self.cokernel),
                opt(&self.left),
                opt(&self.right),
            ]],
        )
    }

    fn plain(&self) -> String {
        let mut s = format!("ring: {}\nexponents: {}\n", self.ring, join(&self.exponents, " "));
        if self.saturated {
            s.push_str("saturated: some exponent reaches k\n");
        }
        if let Some(c) = &self.cokernel {
            let _ = writeln!(s, "cokernel: {c}");
        }
        if let (Some(l), Some(r)) = (&self.left, &self.right) {
            let _ = writeln!(s, "left: {l}\nright: {r}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CokOutput {
    pub p: u64,
    pub mod_exp: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    /// Residue field size of the ring the module lives over.
    pub q: u64,
    pub module: CokernelClass,
    pub underlying_group: CokernelClass,
}

impl Render for CokOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &["p", "mod_exp", "poly", "q", "module", "underlying_group"],
            [vec![
                self.p.to_string(),
                self.mod_exp.to_string(),
                opt(&self.poly),
                self.q.to_string(),
                self.module.to_string(),
                self.underlying_group.to_string(),
            ]],
        )
    }

    fn plain(&self) -> String {
        format!(
            "module: {} over q={}\nunderlying group: {}\n",
            self.module, self.q, self.underlying_group
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutOutput {
    pub module: ModuleType,
    pub q: u64,
    /// Decimal string.
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
}

impl Render for AutOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &["module", "q", "formula", "oracle", "agree"],
            [vec![
                self.module.to_string(),
                self.q.to_string(),
                self.formula.clone(),
                opt(&self.oracle),
                opt(&self.agree),
            ]],
        )
    }

    fn plain(&self) -> String {
        let mut s = format!("|Aut({})| over q={}: {}\n", self.module, self.q, self.formula);
        if let Some(o) = &self.oracle {
            let verdict = if self.agree == Some(true) { "agrees" } else { "MISMATCH" };
            let _ = writeln!(s, "brute force: {o} ({verdict})");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub key: Vec<u32>,
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCensusOutput {
    pub q: u64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub polys: Vec<String>,
    /// `"rank"` of the matrix, or `"corank"` of each `P_j(X)`.
    pub key: String,
    pub rows: Vec<RankRow>,
}

impl Render for RankCensusOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &[self.key.as_str(), "count", "formula"],
            self.rows
                .iter()
                .map(|r| vec![join(&r.key, " "), r.count.to_string(), opt(&r.formula)]),
        )
    }

    fn plain(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = write!(s, "{} {}: {}", self.key, join(&r.key, " "), r.count);
            if let Some(f) = &r.formula {
                let _ = write!(s, " (formula {f})");
            }
            s.push('\n');
        }
        let total: u64 = self.rows.iter().map(|r| r.count).sum();
        let _ = writeln!(s, "total: {total}");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOutput {
    pub formula: String,
    pub instance: ProblemInstance,
    /// Decimal string.
    pub value: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Render for CountOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &["formula", "instance", "value", "warnings"],
            [vec![
                self.formula.clone(),
                self.instance.describe(),
                self.value.clone(),
                self.warnings.join("; "),
            ]],
        )
    }

    fn plain(&self) -> String {
        let mut s = format!("{}\n", self.value);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitOutput {
    pub kind: String,
    pub p: u64,
    pub polys: Vec<String>,
    pub description: String,
    pub tol: f64,
    pub value: f64,
    pub truncation_index: u32,
}

impl Render for LimitOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &["kind", "p", "polys", "description", "tol", "value", "truncation_index"],
            [vec![
                self.kind.clone(),
                self.p.to_string(),
                self.polys.join(" "),
                self.description.clone(),
                self.tol.to_string(),
                self.value.to_string(),
                self.truncation_index.to_string(),
            ]],
        )
    }

    fn plain(&self) -> String {
        format!(
            "{:.12}\ntruncation index: {} (tolerance {:e})\n",
            self.value, self.truncation_index, self.tol
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateOutput {
    /// `"lifts"` of one residue matrix or `"full"`.
    pub mode: String,
    pub instance: ProblemInstance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue: Option<String>,
    /// Decimal strings.
    pub count: String,
    pub total: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_total: Option<u64>,
    /// The closed form, `"a"` or `"a/b"`.
    pub predicted: String,
    pub agree: bool,
}

impl Render for EnumerateOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &[
                "mode",
                "instance",
                "residue",
                "count",
                "total",
                "residue_count",
                "residue_total",
                "predicted",
                "agree",
            ],
            [vec![
                self.mode.clone(),
                self.instance.describe(),
                opt(&self.residue),
                self.count.clone(),
                self.total.clone(),
                opt(&self.residue_count),
                opt(&self.residue_total),
                self.predicted.clone(),
                self.agree.to_string(),
            ]],
        )
    }

    fn plain(&self) -> String {
        let mut s = format!("{}\n", self.instance.describe());
        if let Some(r) = &self.residue {
            let _ = writeln!(s, "residue matrix: {r}");
        }
        let _ = writeln!(s, "count: {} of {}", self.count, self.total);
        if let (Some(c), Some(t)) = (self.residue_count, self.residue_total) {
            let _ = writeln!(s, "residue count: {c} of {t}");
        }
        let verdict = if self.agree { "agrees" } else { "MISMATCH" };
        let _ = writeln!(s, "closed form: {} ({verdict})", self.predicted);
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutput {
    pub table: SampleTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ExperimentReport>,
}

impl Render for SampleOutput {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        let t = &self.table;
        csv_table(
            &["class", "count", "frequency"],
            t.counts
                .iter()
                .map(|(class, &count)| vec![class.to_string(), count.to_string(), t.frequency(class).to_string()]),
        )
    }

    fn plain(&self) -> String {
        let t = &self.table;
        let mut s = format!("{} samples, seed {}\n", t.samples, t.seed);
        for (class, &count) in t.counts.iter() {
            let _ = writeln!(s, "{class}: {count} ({:.6})", t.frequency(class));
        }
        if let Some(r) = &self.report {
            let _ = writeln!(
                s,
                "target: {} vs {} ({})",
                r.observed_value(),
                r.predicted_value(),
                r.verdict
            );
        }
        s
    }
}

impl Render for Vec<ExperimentReport> {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        let mut buf = Vec::new();
        ExperimentReport::write_csv(self, &mut buf).map_err(|e| e.to_string())?;
        String::from_utf8(buf).map_err(|e| e.to_string())
    }

    fn plain(&self) -> String {
        let mut s = String::new();
        for r in self {
            let _ = writeln!(
                s,
                "[{}] {} ({}): observed {}, predicted {}",
                r.verdict,
                r.instance,
                r.mode,
                r.observed_value(),
                r.predicted_value()
            );
            for note in &r.notes {
                let _ = writeln!(s, "  {note}");
            }
        }
        s
    }
}

impl Render for Scoreboard {
    fn json(&self) -> Result<String, String> {
        json(self)
    }

    fn csv(&self) -> Result<String, String> {
        csv_table(
            &["id", "title", "passed", "blocking", "detail", "runtime_ms"],
            self.outcomes.iter().map(|o| {
                vec![
                    o.id.to_string(),
                    o.title.clone(),
                    o.passed.to_string(),
                    o.blocking.to_string(),
                    o.detail.clone(),
                    format!("{:.1}", o.runtime_ms),
                ]
            }),
        )
    }

    fn plain(&self) -> String {
        let mut s = String::new();
        for o in &self.outcomes {
            let _ = writeln!(s, "{o}");
        }
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        let _ = writeln!(
            s,
            "{passed}/{} criteria passed: {}",
            self.outcomes.len(),
            if self.passed() { "OK" } else { "FAILED" }
        );
        s
    }
}
