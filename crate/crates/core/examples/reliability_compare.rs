//! Joins CI run history with workflow size, splits workflows into size
//! terciles, and compares small against large on each outcome.
//!
//!     cargo run --example reliability_compare

use std::path::PathBuf;

use wflens::catalog::default_catalog;
use wflens::pipeline::{analyze_file, discover_workflows};
use wflens::reliability::{
    all_reliability_metrics, comparison_report, join, load_run_records, parse_timestamp, Window,
    WorkflowProfile,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn main() -> wflens::Result<()> {
    let catalog = default_catalog();
    let profiles = discover_workflows(&[fixture("corpus")])?
        .iter()
        .map(|p| {
            // run records name workflows by their path relative to the crate root
            let id = p.strip_prefix(env!("CARGO_MANIFEST_DIR")).unwrap_or(p);
            let id = id.to_string_lossy().trim_start_matches('/').to_string();
            analyze_file(p, catalog).map(|a| WorkflowProfile::from_metrics(id, &a.metrics))
        })
        .collect::<wflens::Result<Vec<_>>>()?;

    let text = std::fs::read_to_string(fixture("runs.jsonl"))
        .map_err(|e| wflens::Error::io(fixture("runs.jsonl"), e))?;
    let log = load_run_records(&text)?;
    let window = Window::new(
        parse_timestamp("2024-01-01")?,
        parse_timestamp("2024-03-31")?,
    )?;
    let observations = join(profiles, all_reliability_metrics(&log.records, window));
    let report = comparison_report(&observations)?;

    println!("{} workflows, alpha {}", report.n_workflows, report.alpha);
    println!(
        "{:<24} {:<14} {:>7} {:>9} {:>7} direction",
        "size", "outcome", "delta", "p_adj", "sig"
    );
    for cell in &report.cells {
        let delta = cell.effect.as_ref().map_or(f64::NAN, |e| e.delta);
        println!(
            "{:<24} {:<14} {:>7.3} {:>9.3} {:>7} {:?}",
            cell.size_metric.as_str(),
            cell.outcome.as_str(),
            delta,
            cell.p_adjusted.unwrap_or(f64::NAN),
            cell.significant,
            cell.direction
        );
    }
    Ok(())
}
