//! Validates the bundled construct catalog, prints per-feature sizes,
//! classifies a few constructs, and extracts a fresh catalog from a
//! directory of workflows.
//!
//!     cargo run --example catalog_report [-- dir]

use std::path::PathBuf;

use wflens::catalog::{classify, default_catalog, extract_catalog, Feature};
use wflens::pipeline::{analyze_file, discover_workflows};

fn main() -> wflens::Result<()> {
    let catalog = default_catalog();
    let report = wflens::catalog::validate_catalog(catalog);
    for check in &report.checks {
        let mark = if check.pass { "ok  " } else { "FAIL" };
        println!(
            "{mark} {:<28} {:>4} (expected {})",
            check.name, check.actual, check.expected
        );
    }

    println!(
        "\n{} constructs, version {}",
        catalog.len(),
        catalog.version()
    );
    for feature in Feature::ALL {
        println!(
            "  {:<22} {:>3}",
            feature.as_str(),
            catalog.feature_size(feature)
        );
    }

    println!();
    for text in [
        "jobs.<id>.steps[*].uses",
        "on.push.branches",
        "jobs.<id>.telepathy",
    ] {
        let construct = text.parse()?;
        let class = classify(&construct, catalog).map_or("unknown", |f| f.as_str());
        println!("{text:<28} {class}");
    }

    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/tests/fixtures/corpus"
            ))
        });
    let bags = discover_workflows(&[dir])?
        .iter()
        .map(|p| analyze_file(p, catalog).map(|a| a.bag))
        .collect::<wflens::Result<Vec<_>>>()?;
    let extracted = extract_catalog(&bags)?;
    println!(
        "\nextracted {} constructs from {} workflows",
        extracted.len(),
        bags.len()
    );
    Ok(())
}
