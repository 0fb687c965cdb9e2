//! The `wflens` command line.
//!
//! Exit codes: 0 success, 1 lint warnings (or a failed catalog check),
//! 2 unreadable or unparseable input, 64 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::abstraction::Construct;
use crate::catalog::{
    classify, default_catalog, extract_catalog, load_catalog, validate_catalog, Catalog, Feature,
};
use crate::corpus::{
    corpus_stats, evolution_series, load_manifest, materialize_snapshots, Aggregate,
    EvolutionSeries, SeriesMetric, YearMonth,
};
use crate::error::{Error, Result};
use crate::lint::{evaluate, load_risk_model, Severity};
use crate::metrics::{ScanRecord, SizeMetric, WorkflowMetrics};
use crate::pipeline::{analyze_file, discover_workflows, Analysis};
use crate::reliability::{
    all_reliability_metrics, comparison_report, import_github_runs, join, load_run_records,
    regress_features, regress_sizes, FeatureModel, Observation, RunLog, Window, WorkflowProfile,
    MIN_RUNS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "wflens",
    version,
    about = "Usage, evolution and reliability analysis for GitHub Actions workflows"
)]
pub struct Cli {
    /// Catalog file replacing the embedded one.
    #[arg(long, global = true, env = "WFLENS_CATALOG")]
    catalog: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-file size and feature metrics.
    Scan {
        /// Workflow files or directories.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Size and feature diagnostics.
    Lint {
        /// Workflow files or directories.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Risk model override (JSON).
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Inspect or build construct catalogs.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
    /// Corpus-wide statistics and evolution series.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Run-based reliability metrics, comparisons and regressions.
    Reliability {
        #[command(subcommand)]
        command: ReliabilityCommand,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCommand {
    /// Check the catalog against the reference construct counts.
    Validate {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Build an unclassified catalog from the constructs seen in a corpus.
    Extract {
        /// Workflow files or directories.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print the feature of each construct.
    Classify {
        #[arg(required = true)]
        constructs: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct MonthRange {
    /// History manifest (JSONL).
    #[arg(long)]
    manifest: PathBuf,
    /// First month, YYYY-MM.
    #[arg(long)]
    from: String,
    /// Last month, YYYY-MM.
    #[arg(long)]
    to: String,
}

#[derive(Subcommand, Debug)]
enum CorpusCommand {
    /// Construct frequencies, Gini, feature usage and distribution summaries.
    Stats {
        /// Workflow files or directories.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Monthly series of a per-workflow metric.
    Evolve {
        #[command(flatten)]
        range: MonthRange,
        /// n_paths, n_constructs, n_features, path_construct_ratio or usage:<feature>.
        #[arg(long, default_value = "n_paths")]
        metric: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Mann-Kendall trend test on a monthly series.
    Trend {
        #[command(flatten)]
        range: MonthRange,
        #[arg(long, default_value = "n_paths")]
        metric: String,
        /// mean, median, q1 or q3.
        #[arg(long, default_value = "median")]
        agg: String,
    },
}

#[derive(Args, Debug)]
struct RunInput {
    /// Run records (JSONL).
    #[arg(long)]
    runs: PathBuf,
    /// START,END as RFC 3339 timestamps or YYYY-MM-DD dates.
    #[arg(long)]
    window: String,
}

#[derive(Subcommand, Debug)]
enum ReliabilityCommand {
    /// Failure rate, commits, time to repair and availability per workflow (JSONL).
    Metrics {
        #[command(flatten)]
        input: RunInput,
    },
    /// Mann-Whitney U and Cliff's delta between small and large workflows.
    Compare {
        #[command(flatten)]
        input: RunInput,
        /// Output of `wflens scan`; its `file` fields are matched to run workflow ids.
        #[arg(long)]
        scan: PathBuf,
        /// Only report rows for these size metrics.
        #[arg(long)]
        size: Vec<String>,
    },
    /// Logistic and negative binomial regressions on size or features.
    Regress {
        #[command(flatten)]
        input: RunInput,
        /// Output of `wflens scan`; its `file` fields are matched to run workflow ids.
        #[arg(long)]
        scan: PathBuf,
        /// presence or path_count; without it the size metrics are regressed.
        #[arg(long)]
        feature_model: Option<String>,
        /// Restrict feature regressions to these features.
        #[arg(long)]
        feature: Vec<String>,
        /// Workflows with fewer success/failure runs are left out.
        #[arg(long, default_value_t = MIN_RUNS)]
        min_runs: usize,
    },
    /// Convert a saved GitHub `workflow_runs` API response into run records.
    Import { dump: PathBuf },
}

/// Where command output goes.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                io.err.write_all(rendered.as_bytes())
            } else {
                io.out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            match e {
                Error::Usage(_) => EXIT_USAGE,
                _ => EXIT_INPUT,
            }
        }
    }
}

/// Parses a command-line value; failures are usage errors.
fn arg<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T> {
    s.parse().map_err(|e: Error| Error::Usage(e.to_string()))
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    // going through Value sorts object keys
    let value = serde_json::to_value(value)?;
    let text = serde_json::to_string_pretty(&value)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn write_text(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn execute(cli: Cli, io: &mut Io<'_>) -> Result<i32> {
    let owned;
    let catalog: &Catalog = match &cli.catalog {
        Some(path) => {
            owned = load_catalog(path)?;
            &owned
        }
        None => default_catalog(),
    };
    match cli.command {
        Command::Scan { paths, format } => cmd_scan(&paths, format, catalog, io),
        Command::Lint {
            paths,
            model,
            format,
        } => cmd_lint(&paths, model.as_deref(), format, catalog, io),
        Command::Catalog { command } => cmd_catalog(command, catalog, cli.catalog.is_some(), io),
        Command::Corpus { command } => cmd_corpus(command, catalog, io),
        Command::Reliability { command } => cmd_reliability(command, io),
    }
}

fn display(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

/// Analyses every discovered file; failures are kept alongside successes.
fn analyze_all(paths: &[PathBuf], catalog: &Catalog) -> Result<Vec<(String, Result<Analysis>)>> {
    Ok(discover_workflows(paths)?
        .into_iter()
        .map(|p| (display(&p), analyze_file(&p, catalog)))
        .collect())
}

fn cmd_scan(paths: &[PathBuf], format: Format, catalog: &Catalog, io: &mut Io<'_>) -> Result<i32> {
    let results = analyze_all(paths, catalog)?;
    let failed = results.iter().any(|(_, r)| r.is_err());
    let records: Vec<ScanRecord> = results
        .iter()
        .map(|(file, r)| match r {
            Ok(a) => ScanRecord::from_metrics(file.clone(), &a.metrics),
            Err(e) => ScanRecord::failed(file.clone(), e),
        })
        .collect();
    match format {
        Format::Json => write_json(io.out, &records)?,
        _ => {
            let mut text = String::new();
            for r in &records {
                match (&r.error, r.n_paths) {
                    (Some(e), _) => text.push_str(&format!("{}: error: {e}\n", r.file)),
                    (None, Some(n)) => text.push_str(&format!(
                        "{}: paths={n} constructs={} features={} ratio={} valid={}\n",
                        r.file,
                        r.n_constructs.unwrap_or(0),
                        r.n_features.unwrap_or(0),
                        r.path_construct_ratio.unwrap_or(0.0),
                        r.valid
                    )),
                    _ => {}
                }
            }
            write_text(io.out, &text)?;
        }
    }
    Ok(if failed { EXIT_INPUT } else { EXIT_OK })
}

#[derive(Serialize)]
struct LintReport {
    file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    diagnostics: Vec<crate::lint::Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<crate::lint::RiskSummary>,
}

fn cmd_lint(
    paths: &[PathBuf],
    model: Option<&Path>,
    format: Format,
    catalog: &Catalog,
    io: &mut Io<'_>,
) -> Result<i32> {
    let model = load_risk_model(model)?;
    let results = analyze_all(paths, catalog)?;
    let mut reports = Vec::new();
    for (file, r) in results {
        reports.push(match r {
            Ok(a) => {
                let (diagnostics, summary) = evaluate(&file, &a.metrics, &model);
                LintReport {
                    file,
                    error: None,
                    diagnostics,
                    summary: Some(summary),
                }
            }
            Err(e) => LintReport {
                file,
                error: Some(e.to_string()),
                diagnostics: Vec::new(),
                summary: None,
            },
        });
    }
    let failed = reports.iter().any(|r| r.error.is_some());
    let warned = reports
        .iter()
        .flat_map(|r| &r.diagnostics)
        .any(|d| d.severity == Severity::Warn);
    match format {
        Format::Json => write_json(io.out, &reports)?,
        _ => {
            let mut text = String::new();
            for r in &reports {
                if let Some(e) = &r.error {
                    text.push_str(&format!("{}: error: {e}\n", r.file));
                }
                for d in &r.diagnostics {
                    text.push_str(&d.render());
                    text.push('\n');
                }
                if let Some(s) = &r.summary {
                    text.push_str(&format!(
                        "{}: relative failure odds {:.4}, relative commit rate {:.4} {}\n",
                        r.file, s.relative_failure_odds, s.relative_commit_rate, s.caveat
                    ));
                }
            }
            write_text(io.out, &text)?;
        }
    }
    Ok(if failed {
        EXIT_INPUT
    } else if warned {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    })
}

fn cmd_catalog(
    command: CatalogCommand,
    catalog: &Catalog,
    custom: bool,
    io: &mut Io<'_>,
) -> Result<i32> {
    match command {
        CatalogCommand::Validate { format } => {
            let report = validate_catalog(catalog);
            match format {
                Format::Json => write_json(io.out, &report)?,
                _ => {
                    let mut text = format!(
                        "catalog {}: {} constructs ({} workflow, {} job, {} step)\n",
                        if custom { "file" } else { "embedded" },
                        report.size,
                        report.levels.values().next().copied().unwrap_or(0),
                        report.levels.values().nth(1).copied().unwrap_or(0),
                        report.levels.values().nth(2).copied().unwrap_or(0),
                    );
                    for (feature, n) in &report.features {
                        text.push_str(&format!("  {feature}: {n}\n"));
                    }
                    for check in report.failures() {
                        text.push_str(&format!(
                            "FAIL {}\n",
                            check.delta.as_deref().unwrap_or(&check.name)
                        ));
                    }
                    for construct in &report.level_mismatches {
                        text.push_str(&format!("  level mismatch: {construct}\n"));
                    }
                    text.push_str(if report.passed {
                        "ok\n"
                    } else {
                        "catalog check failed\n"
                    });
                    write_text(io.out, &text)?;
                }
            }
            Ok(if report.passed {
                EXIT_OK
            } else {
                EXIT_FINDINGS
            })
        }
        CatalogCommand::Extract { paths } => {
            let results = analyze_all(&paths, catalog)?;
            let mut bags = Vec::new();
            let mut failed = false;
            for (file, r) in results {
                match r {
                    Ok(a) => bags.push(a.bag),
                    Err(e) => {
                        failed = true;
                        let _ = writeln!(io.err, "{file}: {e}");
                    }
                }
            }
            let extracted = extract_catalog(&bags)?;
            write_json(io.out, &extracted.to_file())?;
            Ok(if failed { EXIT_INPUT } else { EXIT_OK })
        }
        CatalogCommand::Classify { constructs } => {
            let mut text = String::new();
            for raw in constructs {
                let construct: Construct = arg(&raw)?;
                let label = match (catalog.contains(&construct), classify(&construct, catalog)) {
                    (_, Some(feature)) => feature.to_string(),
                    (true, None) => "unclassified".to_string(),
                    (false, None) => "unknown".to_string(),
                };
                text.push_str(&format!("{construct}\t{label}\n"));
            }
            write_text(io.out, &text)?;
            Ok(EXIT_OK)
        }
    }
}

fn monthly_series(
    range: &MonthRange,
    metric: &str,
    catalog: &Catalog,
    io: &mut Io<'_>,
) -> Result<(EvolutionSeries, bool)> {
    let metric: SeriesMetric = arg(metric)?;
    let months = YearMonth::range(arg(&range.from)?, arg(&range.to)?)
        .map_err(|e| Error::Usage(e.to_string()))?;
    let histories = load_manifest(&range.manifest)?;
    let monthly = materialize_snapshots(&histories, &months)?;
    let base = range.manifest.parent().unwrap_or(Path::new("."));
    let mut cache: BTreeMap<String, Option<WorkflowMetrics>> = BTreeMap::new();
    let mut failed = false;
    for snap in monthly.iter().flat_map(|m| &m.snapshots) {
        if cache.contains_key(&snap.file) {
            continue;
        }
        let analysed = match analyze_file(&base.join(&snap.file), catalog) {
            Ok(a) => Some(a.metrics),
            Err(e) => {
                failed = true;
                let _ = writeln!(io.err, "{}: {e}", snap.file);
                None
            }
        };
        cache.insert(snap.file.clone(), analysed);
    }
    let series = evolution_series(metric.to_string(), &monthly, |s| {
        cache[&s.file].as_ref().map(|m| metric.value(m))
    })?;
    Ok((series, failed))
}

fn cmd_corpus(command: CorpusCommand, catalog: &Catalog, io: &mut Io<'_>) -> Result<i32> {
    match command {
        CorpusCommand::Stats { paths } => {
            let mut items = Vec::new();
            let mut failed = false;
            for (file, r) in analyze_all(&paths, catalog)? {
                match r {
                    Ok(a) => items.push((a.metrics, a.bag)),
                    Err(e) => {
                        failed = true;
                        let _ = writeln!(io.err, "{file}: {e}");
                    }
                }
            }
            let stats = corpus_stats(&items)?;
            write_json(io.out, &stats)?;
            Ok(if failed { EXIT_INPUT } else { EXIT_OK })
        }
        CorpusCommand::Evolve {
            range,
            metric,
            format,
        } => {
            let (series, failed) = monthly_series(&range, &metric, catalog, io)?;
            match format {
                Format::Json => write_json(io.out, &series)?,
                _ => write_text(io.out, &series.to_csv())?,
            }
            Ok(if failed { EXIT_INPUT } else { EXIT_OK })
        }
        CorpusCommand::Trend { range, metric, agg } => {
            let aggregate: Aggregate = arg(&agg)?;
            let (series, failed) = monthly_series(&range, &metric, catalog, io)?;
            let test = series.trend(aggregate)?;
            #[derive(Serialize)]
            struct Trend<'a> {
                metric: &'a str,
                aggregate: &'a str,
                months: usize,
                test: crate::stats::TestResult,
            }
            write_json(
                io.out,
                &Trend {
                    metric: &series.metric,
                    aggregate: &agg,
                    months: series.points.len(),
                    test,
                },
            )?;
            Ok(if failed { EXIT_INPUT } else { EXIT_OK })
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_runs(input: &RunInput, io: &mut Io<'_>) -> Result<(RunLog, Window)> {
    let window: Window = arg(&input.window)?;
    let log = load_run_records(&read(&input.runs)?)?;
    for w in &log.warnings {
        let _ = writeln!(io.err, "warning: {w}");
    }
    Ok((log, window))
}

fn load_observations(input: &RunInput, scan: &Path, io: &mut Io<'_>) -> Result<Vec<Observation>> {
    let (log, window) = load_runs(input, io)?;
    let records: Value = serde_json::from_str(&read(scan)?)?;
    let list = records.as_array().ok_or_else(|| {
        Error::Invalid(format!(
            "{}: expected a JSON array of scan records",
            scan.display()
        ))
    })?;
    let mut profiles = Vec::new();
    for record in list {
        if let Some(p) = WorkflowProfile::from_scan_record(record)? {
            profiles.push(p);
        }
    }
    Ok(join(
        profiles,
        all_reliability_metrics(&log.records, window),
    ))
}

fn cmd_reliability(command: ReliabilityCommand, io: &mut Io<'_>) -> Result<i32> {
    match command {
        ReliabilityCommand::Metrics { input } => {
            let (log, window) = load_runs(&input, io)?;
            let mut text = String::new();
            for m in all_reliability_metrics(&log.records, window) {
                let value = serde_json::to_value(&m)?;
                text.push_str(&serde_json::to_string(&value)?);
                text.push('\n');
            }
            write_text(io.out, &text)?;
            Ok(EXIT_OK)
        }
        ReliabilityCommand::Compare { input, scan, size } => {
            let observations = load_observations(&input, &scan, io)?;
            let mut report = comparison_report(&observations)?;
            if !size.is_empty() {
                let keep: Vec<SizeMetric> = size.iter().map(|s| arg(s)).collect::<Result<_>>()?;
                report.cells.retain(|c| keep.contains(&c.size_metric));
            }
            write_json(io.out, &report)?;
            Ok(EXIT_OK)
        }
        ReliabilityCommand::Regress {
            input,
            scan,
            feature_model,
            feature,
            min_runs,
        } => {
            let observations = load_observations(&input, &scan, io)?;
            let report = match feature_model {
                None if feature.is_empty() => regress_sizes(&observations, min_runs)?,
                None => return Err(Error::Usage("--feature requires --feature-model".into())),
                Some(model) => {
                    let model: FeatureModel = arg(&model)?;
                    let features: Vec<Feature> =
                        feature.iter().map(|f| arg(f)).collect::<Result<_>>()?;
                    let selection = (!features.is_empty()).then_some(features.as_slice());
                    regress_features(&observations, model, selection, min_runs)?
                }
            };
            write_json(io.out, &report)?;
            Ok(EXIT_OK)
        }
        ReliabilityCommand::Import { dump } => {
            let log = import_github_runs(&read(&dump)?)?;
            for w in &log.warnings {
                let _ = writeln!(io.err, "warning: {w}");
            }
            write_text(io.out, &crate::reliability::write_run_records(&log.records))?;
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("wflens").chain(args.iter().copied()),
            &mut Io {
                out: &mut out,
                err: &mut err,
            },
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["scan"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
        assert_eq!(call(&["--version"]).0, EXIT_OK);
    }

    #[test]
    fn classify_and_validate() {
        let (code, out, _) = call(&["catalog", "classify", "jobs.<id>.environment", "made.up"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out, "jobs.<id>.environment\tdeployment\nmade.up\tunknown\n");
        let (code, out, _) = call(&["catalog", "validate"]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.ends_with("ok\n"));
        assert_eq!(
            call(&["catalog", "classify", "jobs.<id>.steps[0]"]).0,
            EXIT_USAGE
        );
    }
}
