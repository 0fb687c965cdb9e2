//! Builds a monthly series of median workflow size from a snapshot
//! manifest and tests it for a monotonic trend.
//!
//!     cargo run --example evolution_trend [-- manifest.jsonl]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use wflens::catalog::default_catalog;
use wflens::corpus::{
    evolution_series, load_manifest, materialize_snapshots, Aggregate, SeriesMetric, YearMonth,
};
use wflens::pipeline::analyze_file;

fn main() -> wflens::Result<()> {
    let manifest = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/tests/fixtures/history/manifest.jsonl"
            ))
        });
    let base = manifest.parent().unwrap_or(Path::new("."));
    let histories = load_manifest(&manifest)?;
    let months = YearMonth::range(YearMonth::new(2023, 1)?, YearMonth::new(2023, 12)?)?;
    let monthly = materialize_snapshots(&histories, &months)?;

    let catalog = default_catalog();
    let mut sizes = BTreeMap::new();
    for snap in monthly.iter().flat_map(|m| &m.snapshots) {
        if !sizes.contains_key(&snap.file) {
            let value = analyze_file(&base.join(&snap.file), catalog)
                .ok()
                .map(|a| SeriesMetric::Paths.value(&a.metrics));
            sizes.insert(snap.file.clone(), value);
        }
    }
    let series = evolution_series("n_paths", &monthly, |s| sizes[&s.file])?;
    print!("{}", series.to_csv());

    let trend = series.trend(Aggregate::Median)?;
    println!(
        "\nmann-kendall on monthly medians: tau={:.3} p={:.2e}",
        trend.tau.unwrap_or(f64::NAN),
        trend.p_value
    );
    Ok(())
}
