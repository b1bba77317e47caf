use std::collections::HashSet;
use std::process::Command;

use cokernels::experiments::ExperimentReport;
use cokernels::verify::Scoreboard;
use cokernels::CokernelClass;
use cokernels_cli::output::{
    AutOutput, CokOutput, CountOutput, EnumerateOutput, LimitOutput, RankCensusOutput, SampleOutput, SnfOutput,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["cokernels"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cokernels_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Runs with `--format json`, parses into `T` and checks that `T`
/// serializes back to the same document.
fn json_roundtrip<T: Serialize + DeserializeOwned>(args: &[&str]) -> T {
    let mut argv = vec!["--format", "json"];
    argv.extend_from_slice(args);
    let (code, out, err) = invoke(&argv);
    assert_eq!(code, 0, "stderr: {err}");
    let raw: Value = serde_json::from_str(&out).unwrap();
    let parsed: T = serde_json::from_str(&out).unwrap();
    assert_eq!(serde_json::to_value(&parsed).unwrap(), raw, "round trip of {args:?}");
    parsed
}

/// Order of `(Z/4)^2 / image(A)` for a 2x2 integer matrix `A`.
fn cokernel_order_mod4(a: [[u64; 2]; 2]) -> usize {
    let mut image = HashSet::new();
    for x in 0..4 {
        for y in 0..4 {
            image.insert(((a[0][0] * x + a[0][1] * y) % 4, (a[1][0] * x + a[1][1] * y) % 4));
        }
    }
    16 / image.len()
}

#[test]
fn cok_example() {
    let out: CokOutput = json_roundtrip(&["cok", "--p", "2", "--mod-exp", "2", "--poly", "1,1,1", "--matrix", "0,1;1,1"]);
    assert_eq!(out.q, 4);
    let module = out.module.module().expect("not saturated").clone();
    let group = out.underlying_group.module().expect("not saturated").clone();
    assert_eq!(module.underlying_group(), group);
    // P(X) = X^2 + X + I = [[2,2],[2,0]] mod 4.
    let order = cokernel_order_mod4([[2, 2], [2, 0]]);
    assert_eq!(2usize.pow(group.order_log_q()), order);
    assert!(16 % order == 0);
}

#[test]
fn count_example() {
    let args = [
        "count", "--p", "2", "--N", "1", "--n", "2", "--poly", "0,1", "--poly", "-1,1", "--target", "1^1", "--target",
        "1^1",
    ];
    let (code, out, _) = invoke(&args);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("4"));
    let parsed: CountOutput = json_roundtrip(&args);
    assert_eq!(parsed.value, "4");
    assert!(parsed.warnings.is_empty());
}

#[test]
fn limit_example() {
    let oracle: f64 = (1..200).map(|i| 1.0 - 0.5f64.powi(i)).product();
    let out: LimitOutput = json_roundtrip(&["limit", "--p", "2", "--poly", "0,1", "--target", "0", "--tol", "1e-9"]);
    assert!((out.value - oracle).abs() < 1e-9, "{} vs {oracle}", out.value);
    assert!((out.value - 0.288788095).abs() < 1e-9);
    assert!(out.truncation_index > 0);
    let (_, plain, _) = invoke(&["limit", "--p", "2", "--poly", "0,1", "--target", "0", "--tol", "1e-9"]);
    assert!(plain.starts_with("0.288788095"));
    assert!(plain.contains("truncation index"));
}

#[test]
fn cl_limit_sums_to_one() {
    let total: f64 = (0..8)
        .map(|r| {
            let r = r.to_string();
            let out: LimitOutput = json_roundtrip(&["limit", "--kind", "cl", "--p", "3", "--poly", "0,1", "--rank", &r]);
            out.value
        })
        .sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");
}

#[test]
fn snf_roundtrip_and_saturation() {
    let out: SnfOutput = json_roundtrip(&["snf", "--p", "2", "--mod-exp", "3", "--matrix", "2,4;6,4", "--transforms"]);
    assert_eq!(out.exponents, vec![1, 3]);
    assert!(out.saturated);
    assert_eq!(out.cokernel, Some(CokernelClass::Saturated));
    assert!(out.left.is_some() && out.right.is_some());
    let out: SnfOutput = json_roundtrip(&["snf", "--p", "2", "--mod-exp", "3", "--poly", "1,1,1", "--matrix", "2,t;0,4"]);
    assert_eq!(out.exponents, vec![0, 3]);
}

#[test]
fn aut_with_oracle() {
    let out: AutOutput = json_roundtrip(&["aut", "--type", "2^1,1^1", "--q", "2", "--oracle"]);
    assert_eq!(out.formula, "8");
    assert_eq!(out.agree, Some(true));
    let out: AutOutput = json_roundtrip(&["aut", "--type", "1^2", "--q", "4"]);
    // |GL_2(F_4)| = (16 - 1)(16 - 4).
    assert_eq!(out.formula, "180");
}

#[test]
fn rank_census_rows_sum_to_field_size() {
    let out: RankCensusOutput = json_roundtrip(&["rank-census", "--q", "4", "--n", "2"]);
    assert_eq!(out.rows.iter().map(|r| r.count).sum::<u64>(), 256);
    for row in &out.rows {
        assert_eq!(row.formula.as_deref(), Some(row.count.to_string().as_str()));
    }
    let out: RankCensusOutput = json_roundtrip(&["rank-census", "--p", "2", "--n", "2", "--poly", "0,1", "--poly", "1,1"]);
    assert_eq!(out.key, "corank");
    assert_eq!(out.rows.iter().map(|r| r.count).sum::<u64>(), 16);
}

#[test]
fn enumerate_lifts_and_full() {
    let out: EnumerateOutput = json_roundtrip(&[
        "enumerate", "--p", "2", "--N", "1", "--n", "2", "--poly", "1,1,1", "--target", "1^1", "--residue", "0,1;1,1",
    ]);
    assert_eq!(out.count, "12");
    assert!(out.agree);
    let out: EnumerateOutput =
        json_roundtrip(&["enumerate", "--p", "2", "--N", "1", "--n", "2", "--poly", "0,1", "--target", "1^1"]);
    assert_eq!((out.count.as_str(), out.total.as_str()), ("72", "256"));
    assert_eq!(out.residue_count, Some(9));
    assert!(out.agree);
}

#[test]
fn probe_reports_exact_match() {
    let reports: Vec<ExperimentReport> = json_roundtrip(&[
        "probe-conjecture", "--p", "2", "--N", "1", "--n", "3", "--poly", "1,1,0,1", "--target", "1^1", "--residue",
        "0,0,1;1,0,1;0,1,0",
    ]);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].verdict.to_string(), "exact-match");
    let (code, csv, _) = invoke(&[
        "--format", "csv", "probe-conjecture", "--p", "2", "--N", "1", "--n", "3", "--poly", "1,1,0,1", "--target",
        "1^1", "--residue", "0,0,1;1,0,1;0,1,0",
    ]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("instance,mode,observed"));
}

#[test]
fn sample_is_worker_independent() {
    let args = |w: &'static str| {
        [
            "--workers", w, "sample", "--p", "2", "--N", "1", "--n", "4", "--poly", "0,1", "--target", "0", "--seed", "9",
            "--samples", "20000",
        ]
    };
    let one: SampleOutput = json_roundtrip(&args("1"));
    let four: SampleOutput = json_roundtrip(&args("4"));
    assert_eq!(one.table, four.table);
    assert_eq!(one.table.counts.total(), 20000);
    assert!(one.report.is_some());
}

#[test]
fn verify_scoreboard() {
    let board: Scoreboard = json_roundtrip(&["verify", "--criteria", "4,7"]);
    assert_eq!(board.outcomes.len(), 2);
    assert!(board.passed());
    let (code, plain, _) = invoke(&["verify", "--criteria", "4"]);
    assert_eq!(code, 0);
    assert!(plain.contains("[PASS]"));
}

#[test]
fn sweep_runs_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    std::fs::write(
        &path,
        r#"{"entries": [
            {"instance": {"p": 2, "polys": ["1,1,1"], "targets": ["1^1"], "n": 2, "N": 1}, "mode": "lifts", "residue": "0,1;1,1"},
            {"instance": {"p": 3, "polys": ["0,1"], "targets": ["0"], "n": 2, "N": 1}, "mode": "full"}
        ]}"#,
    )
    .unwrap();
    let reports: Vec<ExperimentReport> = json_roundtrip(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(reports.len(), 2);
}

#[test]
fn exit_codes() {
    // Invalid input.
    assert_eq!(invoke(&["count", "--p", "4", "--N", "1", "--n", "2", "--poly", "0,1", "--target", "1"]).0, 1);
    assert_eq!(invoke(&["cok", "--p", "2", "--mod-exp", "2", "--matrix", "1,2;3"]).0, 1);
    assert_eq!(invoke(&["snf", "--p", "2", "--mod-exp", "2", "--poly", "1,0,1", "--matrix", "1"]).0, 1);
    assert_eq!(invoke(&["limit", "--p", "2", "--poly", "0,1", "--target", "0", "--tol", "2"]).0, 1);
    assert_eq!(invoke(&["verify", "--criteria", "99"]).0, 1);
    assert_eq!(invoke(&["no-such-command"]).0, 1);
    assert_eq!(invoke(&["--help"]).0, 0);
    // Budget exceeded.
    let (code, _, err) =
        invoke(&["--budget", "1000", "enumerate", "--p", "3", "--N", "2", "--n", "3", "--poly", "0,1", "--target", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("budget"));
    // A sampled frequency far from the limit: at n = 1 the trivial cokernel
    // has probability 1/2, not 0.2888.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    std::fs::write(
        &path,
        r#"{"entries": [{"instance": {"p": 2, "polys": ["0,1"], "targets": ["0"], "n": 1, "N": 1},
            "mode": "sample", "seed": 1, "samples": 100000}]}"#,
    )
    .unwrap();
    assert_eq!(invoke(&["sweep", "--config", path.to_str().unwrap()]).0, 3);
}

#[test]
fn binary_reads_budget_from_environment() {
    let bin = env!("CARGO_BIN_EXE_cokernels");
    let status = Command::new(bin)
        .args(["enumerate", "--p", "2", "--N", "1", "--n", "2", "--poly", "0,1", "--target", "1^1"])
        .env("COKERNELS_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let ok = Command::new(bin)
        .args(["count", "--p", "2", "--N", "1", "--n", "2", "--poly", "0,1", "--poly", "-1,1"])
        .args(["--target", "1^1", "--target", "1^1"])
        .env_remove("COKERNELS_BUDGET")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap().trim(), "4");
}
