//! One line per acceptance criterion; exits nonzero if a blocking one fails.
//!
//! `COKERNELS_CRITERIA=1,5` restricts the run to the listed criteria.

use std::io::Write;

use cokernels::verify::{run_criterion, VerifyOptions, CRITERIA};

fn main() {
    let only: Option<Vec<u32>> = std::env::var("COKERNELS_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let opts = VerifyOptions::default();
    let archive = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&archive).expect("archive directory");
    let mut failed = 0;
    for &(id, _) in &CRITERIA {
        if only.as_ref().is_some_and(|ids| !ids.contains(&id)) {
            continue;
        }
        let outcome = run_criterion(id, &opts);
        println!("{outcome}");
        std::io::stdout().flush().ok();
        if !outcome.reports.is_empty() {
            let path = archive.join(format!("criterion-{id}.json"));
            let json = serde_json::to_string_pretty(&outcome).expect("outcome serializes");
            std::fs::write(&path, json).expect("archive write");
            println!("      report archived at {}", path.display());
        }
        if outcome.blocking && !outcome.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} blocking criteria failed");
        std::process::exit(1);
    }
    println!("all blocking criteria passed");
}
