//! Walks one workflow through the pipeline: concrete paths, their
//! abstracted constructs, the feature each construct belongs to, and the
//! resulting size metrics.
//!
//!     cargo run --example scan_workflow [-- path/to/workflow.yml]

use std::path::PathBuf;

use wflens::abstraction::abstract_path;
use wflens::catalog::{classify, default_catalog};
use wflens::metrics::round4;
use wflens::pipeline::analyze_file;

fn main() -> wflens::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/tests/fixtures/matrix_build.yml"
            ))
        });
    let catalog = default_catalog();
    let analysis = analyze_file(&path, catalog)?;

    println!("{:<44} {:<36} feature", "concrete path", "construct");
    for concrete in &analysis.paths {
        let construct = abstract_path(concrete, catalog.rules());
        let feature = classify(&construct, catalog).map_or("unknown", |f| f.as_str());
        println!(
            "{:<44} {:<36} {feature}",
            concrete.render(),
            construct.render()
        );
    }

    let m = &analysis.metrics;
    println!();
    println!("paths       {}", m.n_paths);
    println!("constructs  {}", m.n_constructs);
    println!("features    {}", m.n_features);
    println!("ratio       {}", round4(m.path_construct_ratio));
    for feature in m.features_present() {
        let usage = m.usage(feature);
        println!(
            "  {:<22} paths={:<3} coverage={:.4}",
            feature.as_str(),
            usage.n_paths,
            round4(usage.construct_coverage)
        );
    }
    if !m.unknown_constructs.is_empty() {
        println!("unknown: {:?}", m.unknown_constructs);
    }
    Ok(())
}
