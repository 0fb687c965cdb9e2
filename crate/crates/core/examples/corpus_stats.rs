//! Corpus-level usage statistics: construct concentration, the most
//! frequent constructs, and feature usage rates.
//!
//!     cargo run --example corpus_stats [-- dir]

use std::path::PathBuf;

use wflens::catalog::default_catalog;
use wflens::corpus::corpus_stats;
use wflens::pipeline::{analyze_file, discover_workflows};

fn main() -> wflens::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/tests/fixtures/corpus"
            ))
        });
    let catalog = default_catalog();
    let items = discover_workflows(&[dir])?
        .iter()
        .map(|p| analyze_file(p, catalog).map(|a| (a.metrics, a.bag)))
        .collect::<wflens::Result<Vec<_>>>()?;
    let stats = corpus_stats(&items)?;

    println!(
        "{} workflows, {} distinct constructs, gini {:.3}",
        stats.n_workflows, stats.distinct_constructs, stats.gini
    );
    for (k, share) in &stats.topk_share {
        println!(
            "  top {k:<3} constructs cover {:.1}% of occurrences",
            share * 100.0
        );
    }
    if let Some(rho) = stats.spearman_paths_constructs {
        println!("spearman(paths, constructs) = {rho:.3}");
    }
    println!(
        "median paths {}, median constructs {}",
        stats.n_paths.median, stats.n_constructs.median
    );

    println!("\nmost frequent:");
    for (construct, freq) in stats.most_frequent(10) {
        let mow = freq.mow.map_or("-".to_string(), |m| m.to_string());
        println!(
            "  {:<40} {:>4} {:>6.1}% mow={mow}",
            construct.render(),
            freq.occurrences,
            freq.pct_wf * 100.0
        );
    }

    println!("\nfeature usage:");
    for (feature, rate) in &stats.feature_usage_rate {
        println!("  {:<22} {:>5.1}%", feature.as_str(), rate * 100.0);
    }
    Ok(())
}
