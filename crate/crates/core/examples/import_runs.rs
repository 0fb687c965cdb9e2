//! Converts a saved GitHub `workflow_runs` API response into run-record
//! JSONL and computes reliability metrics over the imported runs.
//!
//!     cargo run --example import_runs [-- runs.json]

use std::path::PathBuf;

use wflens::reliability::{all_reliability_metrics, import_github_runs, write_run_records, Window};

fn main() -> wflens::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/tests/fixtures/github_runs.json"
            ))
        });
    let text = std::fs::read_to_string(&path).map_err(|e| wflens::Error::io(&path, e))?;
    let log = import_github_runs(&text)?;
    for warning in &log.warnings {
        eprintln!("warning: {warning}");
    }
    print!("{}", write_run_records(&log.records));

    let (Some(first), Some(last)) = (
        log.records.iter().map(|r| r.committed_at).min(),
        log.records.iter().map(|r| r.committed_at).max(),
    ) else {
        return Ok(());
    };
    let window = Window::new(first, last)?;
    println!("\nwindow {first} .. {last}");
    for m in all_reliability_metrics(&log.records, window) {
        println!("{}", serde_json::to_string(&m).expect("metrics serialize"));
    }
    Ok(())
}
