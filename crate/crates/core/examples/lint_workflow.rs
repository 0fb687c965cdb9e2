//! Lints a workflow against the default risk model, then again with a
//! model override that drops one effect and changes another.
//!
//!     cargo run --example lint_workflow [-- path/to/workflow.yml]

use std::path::PathBuf;

use wflens::catalog::default_catalog;
use wflens::lint::{default_risk_model, evaluate, risk_model_with_override, RiskModel};
use wflens::pipeline::analyze_file;

fn main() -> wflens::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/tests/fixtures/commands_env.yml"
            ))
        });
    let analysis = analyze_file(&path, default_catalog())?;
    let file = path.display().to_string();

    show(
        "default model",
        &file,
        &analysis.metrics,
        &default_risk_model(),
    );

    let custom = risk_model_with_override(
        r#"{"feature_effects": {"commands": {"presence_or": null},
                                "environment_variables": {"presence_or": 0.8}}}"#,
    )?;
    show("custom model", &file, &analysis.metrics, &custom);
    Ok(())
}

fn show(title: &str, file: &str, metrics: &wflens::metrics::WorkflowMetrics, model: &RiskModel) {
    let (diagnostics, summary) = evaluate(file, metrics, model);
    println!("== {title}");
    for d in &diagnostics {
        println!("{}", d.render());
    }
    println!(
        "relative failure odds {:.4}, relative commit rate {:.4}\n  {}",
        summary.relative_failure_odds, summary.relative_commit_rate, summary.caveat
    );
}
