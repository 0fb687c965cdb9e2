//! Run outcomes per workflow and their relation to workflow size.
//!
//! Only `success` and `failure` runs drive failure rate, time-to-repair and
//! availability; cancelled, skipped and other runs are ignored there but
//! still count toward the number of commits.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::catalog::Feature;
use crate::error::{Error, Result};
use crate::metrics::{SizeMetric, WorkflowMetrics};
use crate::stats::{
    bh_adjust, cliffs_delta, effect_table, fit_binomial_logistic, fit_negative_binomial,
    mann_whitney_u, quantile_sorted, EffectRow, EffectSize, Family, GlmFit, TestResult,
};

/// Significance level applied after BH adjustment.
pub const ALPHA: f64 = 0.01;
/// Workflows with fewer counted runs are left out of regressions.
pub const MIN_RUNS: usize = 3;
/// Features outside this usage band are excluded from feature regressions.
pub const USAGE_BAND: (f64, f64) = (0.05, 0.95);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    Success,
    Failure,
    Cancelled,
    Skipped,
    Other,
}

impl Conclusion {
    /// Maps a conclusion string; anything outside the closed set is `None`.
    pub fn parse(s: &str) -> Option<Conclusion> {
        match s {
            "success" => Some(Conclusion::Success),
            "failure" => Some(Conclusion::Failure),
            "cancelled" => Some(Conclusion::Cancelled),
            "skipped" => Some(Conclusion::Skipped),
            "other" => Some(Conclusion::Other),
            _ => None,
        }
    }

    fn counted(self) -> bool {
        matches!(self, Conclusion::Success | Conclusion::Failure)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub workflow_id: String,
    pub commit_sha: String,
    pub committed_at: DateTime<Utc>,
    pub conclusion: Conclusion,
}

#[derive(Deserialize)]
struct RawRun {
    workflow_id: String,
    commit_sha: String,
    committed_at: DateTime<Utc>,
    conclusion: String,
}

/// Parsed run records plus warnings for conclusions mapped to `other`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunLog {
    pub records: Vec<RunRecord>,
    pub warnings: Vec<String>,
}

/// Parses run records from JSONL, sorted by `(workflow_id, committed_at)`.
pub fn load_run_records(text: &str) -> Result<RunLog> {
    let mut log = RunLog::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRun = serde_json::from_str(line).map_err(|e| Error::Record {
            line: i + 1,
            message: e.to_string(),
        })?;
        let conclusion = Conclusion::parse(&raw.conclusion).unwrap_or_else(|| {
            let warning = format!(
                "line {}: unknown conclusion `{}` treated as other",
                i + 1,
                raw.conclusion
            );
            log::warn!("{warning}");
            log.warnings.push(warning);
            Conclusion::Other
        });
        log.records.push(RunRecord {
            workflow_id: raw.workflow_id,
            commit_sha: raw.commit_sha,
            committed_at: raw.committed_at,
            conclusion,
        });
    }
    log.records.sort_by(|a, b| {
        a.workflow_id
            .cmp(&b.workflow_id)
            .then(a.committed_at.cmp(&b.committed_at))
    });
    Ok(log)
}

pub fn write_run_records(records: &[RunRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("run records serialize") + "\n")
        .collect()
}

/// Converts a saved GitHub REST `workflow_runs` listing into run records.
/// Only push-triggered, completed runs are kept; the workflow is identified
/// by its file path when the dump carries one.
pub fn import_github_runs(text: &str) -> Result<RunLog> {
    let dump: serde_json::Value = serde_json::from_str(text)?;
    let runs = dump
        .get("workflow_runs")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Invalid("expected an object with a `workflow_runs` array".into()))?;
    let mut log = RunLog::default();
    for (i, run) in runs.iter().enumerate() {
        if run
            .get("event")
            .and_then(|e| e.as_str())
            .is_some_and(|e| e != "push")
        {
            continue;
        }
        let Some(conclusion) = run.get("conclusion").and_then(|c| c.as_str()) else {
            continue;
        };
        let workflow_id = match (
            run.get("path").and_then(|p| p.as_str()),
            run.get("workflow_id"),
        ) {
            (Some(path), _) => path.to_string(),
            (None, Some(id)) => id.to_string(),
            (None, None) => {
                return Err(Error::Invalid(format!(
                    "run {i} has no workflow identifier"
                )))
            }
        };
        let sha = run
            .get("head_sha")
            .and_then(|s| s.as_str())
            .ok_or_else(|| Error::Invalid(format!("run {i} has no head_sha")))?;
        let timestamp = run
            .pointer("/head_commit/timestamp")
            .or_else(|| run.get("created_at"))
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::Invalid(format!("run {i} has no timestamp")))?;
        let committed_at = DateTime::parse_from_rfc3339(timestamp)
            .map_err(|e| Error::Invalid(format!("run {i}: {e}")))?
            .with_timezone(&Utc);
        let conclusion = Conclusion::parse(conclusion).unwrap_or_else(|| {
            log.warnings.push(format!(
                "run {i}: unknown conclusion `{conclusion}` treated as other"
            ));
            Conclusion::Other
        });
        log.records.push(RunRecord {
            workflow_id,
            commit_sha: sha.to_string(),
            committed_at,
            conclusion,
        });
    }
    log.records.sort_by(|a, b| {
        a.workflow_id
            .cmp(&b.workflow_id)
            .then(a.committed_at.cmp(&b.committed_at))
    });
    Ok(log)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Window {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self> {
        if start >= end {
            return Err(Error::Invalid(format!(
                "window start {start} is not before end {end}"
            )));
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t <= self.end
    }

    fn seconds(&self) -> f64 {
        (self.end - self.start).num_milliseconds() as f64 / 1000.0
    }
}

/// Accepts RFC 3339 timestamps or plain `YYYY-MM-DD` dates (midnight UTC).
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| Error::Invalid(format!("bad timestamp `{s}`")))?;
    Ok(Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight")))
}

impl FromStr for Window {
    type Err = Error;

    /// `START,END`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Invalid(format!("expected START,END, got `{s}`")))?;
        Window::new(parse_timestamp(a.trim())?, parse_timestamp(b.trim())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReliabilityMetrics {
    pub workflow_id: String,
    pub n_runs: usize,
    pub n_runs_counted: usize,
    pub n_failures: usize,
    pub failure_rate: Option<f64>,
    pub n_commits: usize,
    /// Seconds from the first failure to the first later success.
    pub ttr_seconds: Option<f64>,
    pub availability: Option<f64>,
}

/// Metrics for one workflow's runs inside `window`.
pub fn reliability_metrics(
    workflow_id: &str,
    runs: &[RunRecord],
    window: Window,
) -> ReliabilityMetrics {
    let mut inside: Vec<&RunRecord> = runs
        .iter()
        .filter(|r| window.contains(r.committed_at))
        .collect();
    inside.sort_by_key(|r| r.committed_at);
    let counted: Vec<&RunRecord> = inside
        .iter()
        .copied()
        .filter(|r| r.conclusion.counted())
        .collect();
    let n_failures = counted
        .iter()
        .filter(|r| r.conclusion == Conclusion::Failure)
        .count();
    let mut shas: Vec<&str> = inside.iter().map(|r| r.commit_sha.as_str()).collect();
    shas.sort_unstable();
    shas.dedup();

    let first_failure = counted.iter().find(|r| r.conclusion == Conclusion::Failure);
    let ttr_seconds = first_failure.and_then(|f| {
        counted
            .iter()
            .find(|r| r.conclusion == Conclusion::Success && r.committed_at > f.committed_at)
            .map(|s| (s.committed_at - f.committed_at).num_milliseconds() as f64 / 1000.0)
    });

    let availability = counted.first().map(|first| {
        // the first run's state also covers the span before it
        let mut failed = 0.0;
        let mut state = first.conclusion;
        let mut since = window.start;
        for run in &counted {
            if state == Conclusion::Failure {
                failed += (run.committed_at - since).num_milliseconds() as f64 / 1000.0;
            }
            state = run.conclusion;
            since = run.committed_at;
        }
        if state == Conclusion::Failure {
            failed += (window.end - since).num_milliseconds() as f64 / 1000.0;
        }
        ((window.seconds() - failed) / window.seconds()).clamp(0.0, 1.0)
    });

    ReliabilityMetrics {
        workflow_id: workflow_id.to_string(),
        n_runs: inside.len(),
        n_runs_counted: counted.len(),
        n_failures,
        failure_rate: (!counted.is_empty()).then(|| n_failures as f64 / counted.len() as f64),
        n_commits: shas.len(),
        ttr_seconds,
        availability,
    }
}

/// Per-workflow metrics for every workflow with at least one run in the
/// window, ordered by workflow id.
pub fn all_reliability_metrics(records: &[RunRecord], window: Window) -> Vec<ReliabilityMetrics> {
    let mut grouped: BTreeMap<&str, Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry(&r.workflow_id).or_default().push(r.clone());
    }
    grouped
        .into_iter()
        .map(|(id, runs)| reliability_metrics(id, &runs, window))
        .filter(|m| m.n_runs > 0)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    FailureRate,
    NCommits,
    Ttr,
    Availability,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome::FailureRate,
        Outcome::NCommits,
        Outcome::Ttr,
        Outcome::Availability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::FailureRate => "failure_rate",
            Outcome::NCommits => "n_commits",
            Outcome::Ttr => "ttr",
            Outcome::Availability => "availability",
        }
    }

    pub fn value(self, m: &ReliabilityMetrics) -> Option<f64> {
        match self {
            Outcome::FailureRate => m.failure_rate,
            Outcome::NCommits => Some(m.n_commits as f64),
            Outcome::Ttr => m.ttr_seconds,
            Outcome::Availability => m.availability,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeGroups {
    pub small: Vec<String>,
    pub medium: Vec<String>,
    pub large: Vec<String>,
    pub boundaries: (f64, f64),
}

/// Splits at the 1/3 and 2/3 type-7 quantiles: `≤ t1`, `(t1, t2]`, `> t2`.
pub fn tercile_split(values: &BTreeMap<String, f64>) -> Result<SizeGroups> {
    let mut sorted: Vec<f64> = values.values().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateGrouping(format!(
            "{} distinct values; at least 3 are needed",
            distinct.len()
        )));
    }
    let t1 = quantile_sorted(&sorted, 1.0 / 3.0).expect("non-empty");
    let t2 = quantile_sorted(&sorted, 2.0 / 3.0).expect("non-empty");
    let mut groups = SizeGroups {
        small: Vec::new(),
        medium: Vec::new(),
        large: Vec::new(),
        boundaries: (t1, t2),
    };
    for (id, &v) in values {
        if v <= t1 {
            groups.small.push(id.clone());
        } else if v <= t2 {
            groups.medium.push(id.clone());
        } else {
            groups.large.push(id.clone());
        }
    }
    Ok(groups)
}

/// What a regression or comparison needs to know about a workflow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorkflowProfile {
    pub workflow_id: String,
    pub sizes: BTreeMap<SizeMetric, f64>,
    /// Paths per feature; zero when absent.
    pub feature_paths: BTreeMap<Feature, usize>,
}

impl WorkflowProfile {
    pub fn from_metrics(workflow_id: impl Into<String>, m: &WorkflowMetrics) -> Self {
        WorkflowProfile {
            workflow_id: workflow_id.into(),
            sizes: SizeMetric::ALL.iter().map(|s| (*s, s.value(m))).collect(),
            feature_paths: m.per_feature.iter().map(|(f, u)| (*f, u.n_paths)).collect(),
        }
    }

    /// Reads one valid record of `scan` output; invalid records yield `None`.
    pub fn from_scan_record(record: &serde_json::Value) -> Result<Option<Self>> {
        let bad = |what: &str| Error::Invalid(format!("scan record missing `{what}`"));
        let file = record
            .get("file")
            .and_then(|f| f.as_str())
            .ok_or_else(|| bad("file"))?;
        if record.get("n_paths").is_none() {
            return Ok(None);
        }
        let mut sizes = BTreeMap::new();
        for metric in SizeMetric::ALL {
            let v = record
                .get(metric.as_str())
                .and_then(|v| v.as_f64())
                .ok_or_else(|| bad(metric.as_str()))?;
            sizes.insert(metric, v);
        }
        let mut feature_paths = BTreeMap::new();
        for feature in Feature::ALL {
            let n = record
                .pointer(&format!("/features/{feature}/n_paths"))
                .and_then(|v| v.as_u64())
                .unwrap_or(0);
            feature_paths.insert(feature, n as usize);
        }
        Ok(Some(WorkflowProfile {
            workflow_id: file.to_string(),
            sizes,
            feature_paths,
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation {
    pub profile: WorkflowProfile,
    pub reliability: ReliabilityMetrics,
}

/// Inner join on workflow id, ordered by id.
pub fn join(
    profiles: Vec<WorkflowProfile>,
    reliability: Vec<ReliabilityMetrics>,
) -> Vec<Observation> {
    let mut by_id: BTreeMap<String, ReliabilityMetrics> = reliability
        .into_iter()
        .map(|m| (m.workflow_id.clone(), m))
        .collect();
    let mut out: Vec<Observation> = profiles
        .into_iter()
        .filter_map(|p| {
            by_id.remove(&p.workflow_id).map(|r| Observation {
                profile: p,
                reliability: r,
            })
        })
        .collect();
    out.sort_by(|a, b| a.profile.workflow_id.cmp(&b.profile.workflow_id));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonCell {
    pub size_metric: SizeMetric,
    pub outcome: Outcome,
    pub boundaries: (f64, f64),
    pub n_small: usize,
    pub n_large: usize,
    pub computable: bool,
    pub test: Option<TestResult>,
    pub effect: Option<EffectSize>,
    pub p_adjusted: Option<f64>,
    pub significant: bool,
    /// Sign of δ with the large group as `x`.
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub n_workflows: usize,
    pub cells: Vec<ComparisonCell>,
}

impl ComparisonReport {
    pub fn cell(&self, size: SizeMetric, outcome: Outcome) -> Option<&ComparisonCell> {
        self.cells
            .iter()
            .find(|c| c.size_metric == size && c.outcome == outcome)
    }
}

fn outcome_values(
    ids: &[String],
    by_id: &BTreeMap<&str, &Observation>,
    outcome: Outcome,
) -> Vec<f64> {
    ids.iter()
        .filter_map(|id| outcome.value(&by_id[id.as_str()].reliability))
        .collect()
}

/// Compares the large and small terciles of one size metric on one outcome.
pub fn compare_groups(
    groups: &SizeGroups,
    observations: &[Observation],
    outcome: Outcome,
    size: SizeMetric,
) -> ComparisonCell {
    let by_id: BTreeMap<&str, &Observation> = observations
        .iter()
        .map(|o| (o.profile.workflow_id.as_str(), o))
        .collect();
    let large = outcome_values(&groups.large, &by_id, outcome);
    let small = outcome_values(&groups.small, &by_id, outcome);
    let computable = !large.is_empty() && !small.is_empty();
    let test = computable.then(|| mann_whitney_u(&large, &small).expect("non-empty samples"));
    let effect = computable.then(|| cliffs_delta(&large, &small).expect("non-empty samples"));
    ComparisonCell {
        size_metric: size,
        outcome,
        boundaries: groups.boundaries,
        n_small: small.len(),
        n_large: large.len(),
        computable,
        test,
        effect,
        p_adjusted: None,
        significant: false,
        direction: Direction::None,
    }
}

/// All 16 size × outcome comparisons with BH adjustment over the computable
/// cells.
pub fn comparison_report(observations: &[Observation]) -> Result<ComparisonReport> {
    let mut cells = Vec::with_capacity(16);
    for size in SizeMetric::ALL {
        let values: BTreeMap<String, f64> = observations
            .iter()
            .map(|o| (o.profile.workflow_id.clone(), o.profile.sizes[&size]))
            .collect();
        let groups = tercile_split(&values)?;
        for outcome in Outcome::ALL {
            cells.push(compare_groups(&groups, observations, outcome, size));
        }
    }
    let raw: Vec<f64> = cells
        .iter()
        .filter_map(|c| c.test.as_ref().map(|t| t.p_value))
        .collect();
    let mut adjusted = bh_adjust(&raw)?.into_iter();
    for cell in cells.iter_mut().filter(|c| c.computable) {
        let p = adjusted
            .next()
            .expect("one adjusted value per computable cell");
        cell.p_adjusted = Some(p);
        cell.significant = p < ALPHA;
        let delta = cell.effect.as_ref().map_or(0.0, |e| e.delta);
        cell.direction = if delta > 0.0 {
            Direction::Positive
        } else if delta < 0.0 {
            Direction::Negative
        } else {
            Direction::None
        };
    }
    Ok(ComparisonReport {
        alpha: ALPHA,
        n_workflows: observations.len(),
        cells,
    })
}

/// Model family fit for each regressed outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressedOutcome {
    /// Binomial logistic on failures out of counted runs; reports an OR.
    FailureRate,
    /// Negative binomial on distinct commits; reports an IRR.
    NCommits,
}

impl RegressedOutcome {
    pub const ALL: [RegressedOutcome; 2] =
        [RegressedOutcome::FailureRate, RegressedOutcome::NCommits];
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionResult {
    pub predictor: String,
    pub outcome: RegressedOutcome,
    pub family: Family,
    pub n: usize,
    pub effect: EffectRow,
    pub p_adjusted: f64,
    pub dispersion: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionReport {
    pub min_runs: usize,
    pub results: Vec<RegressionResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<String>,
}

impl RegressionReport {
    pub fn result(&self, predictor: &str, outcome: RegressedOutcome) -> Option<&RegressionResult> {
        self.results
            .iter()
            .find(|r| r.predictor == predictor && r.outcome == outcome)
    }
}

/// Univariate fit of `outcome` on `x` plus an intercept.
pub fn fit_univariate(
    x: &[f64],
    observations: &[&Observation],
    outcome: RegressedOutcome,
) -> Result<GlmFit> {
    let design = DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    match outcome {
        RegressedOutcome::FailureRate => {
            let y: Vec<f64> = observations
                .iter()
                .map(|o| o.reliability.n_failures as f64)
                .collect();
            let t: Vec<f64> = observations
                .iter()
                .map(|o| o.reliability.n_runs_counted as f64)
                .collect();
            fit_binomial_logistic(&design, &y, &t)
        }
        RegressedOutcome::NCommits => {
            let y: Vec<f64> = observations
                .iter()
                .map(|o| o.reliability.n_commits as f64)
                .collect();
            fit_negative_binomial(&design, &y)
        }
    }
}

fn finish(
    min_runs: usize,
    fits: Vec<(String, RegressedOutcome, usize, GlmFit)>,
    excluded: Vec<String>,
) -> Result<RegressionReport> {
    let mut rows = Vec::with_capacity(fits.len());
    for (predictor, outcome, n, fit) in fits {
        let fit = fit.with_names(["intercept", predictor.as_str()]);
        let table = effect_table(&fit)?;
        rows.push((
            predictor,
            outcome,
            n,
            fit.family,
            fit.dispersion,
            table.rows[1].clone(),
        ));
    }
    let raw: Vec<f64> = rows.iter().map(|r| r.5.p_value).collect();
    let adjusted = bh_adjust(&raw)?;
    let results = rows
        .into_iter()
        .zip(adjusted)
        .map(
            |((predictor, outcome, n, family, dispersion, effect), p_adjusted)| RegressionResult {
                predictor,
                outcome,
                family,
                n,
                effect,
                p_adjusted,
                dispersion,
            },
        )
        .collect();
    Ok(RegressionReport {
        min_runs,
        results,
        excluded,
    })
}

fn eligible(observations: &[Observation], min_runs: usize) -> Vec<&Observation> {
    observations
        .iter()
        .filter(|o| o.reliability.n_runs_counted >= min_runs)
        .collect()
}

/// One univariate regression per size metric and outcome, with BH over all
/// eight.
pub fn regress_sizes(observations: &[Observation], min_runs: usize) -> Result<RegressionReport> {
    let used = eligible(observations, min_runs);
    let mut fits = Vec::new();
    for size in SizeMetric::ALL {
        let x: Vec<f64> = used.iter().map(|o| o.profile.sizes[&size]).collect();
        for outcome in RegressedOutcome::ALL {
            fits.push((
                size.as_str().to_string(),
                outcome,
                used.len(),
                fit_univariate(&x, &used, outcome)?,
            ));
        }
    }
    finish(min_runs, fits, Vec::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureModel {
    /// 0/1 indicator of feature use.
    Presence,
    /// Number of paths belonging to the feature (zero when unused).
    PathCount,
}

impl FromStr for FeatureModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "presence" => Ok(FeatureModel::Presence),
            "path_count" | "path-count" => Ok(FeatureModel::PathCount),
            other => Err(Error::Invalid(format!("unknown feature model `{other}`"))),
        }
    }
}

/// Share of `observations` using each feature.
pub fn usage_rates(observations: &[&Observation]) -> BTreeMap<Feature, f64> {
    let n = observations.len().max(1) as f64;
    Feature::ALL
        .iter()
        .map(|f| {
            let users = observations
                .iter()
                .filter(|o| o.profile.feature_paths[f] > 0)
                .count();
            (*f, users as f64 / n)
        })
        .collect()
}

fn in_band(rate: f64) -> bool {
    rate > USAGE_BAND.0 && rate < USAGE_BAND.1
}

/// Univariate regressions of each outcome on each feature's presence or
/// path count. `features = None` selects every feature inside the usage
/// band; naming a feature outside it is an error.
pub fn regress_features(
    observations: &[Observation],
    model: FeatureModel,
    features: Option<&[Feature]>,
    min_runs: usize,
) -> Result<RegressionReport> {
    let used = eligible(observations, min_runs);
    let rates = usage_rates(&used);
    let (selected, excluded): (Vec<Feature>, Vec<String>) = match features {
        Some(list) => {
            for f in list {
                if !in_band(rates[f]) {
                    return Err(Error::OutsideUsageBand {
                        feature: f.to_string(),
                        rate: rates[f],
                    });
                }
            }
            (list.to_vec(), Vec::new())
        }
        None => {
            let selected = Feature::ALL
                .iter()
                .copied()
                .filter(|f| in_band(rates[f]))
                .collect();
            let excluded = Feature::ALL
                .iter()
                .filter(|f| !in_band(rates[f]))
                .map(|f| f.to_string())
                .collect();
            (selected, excluded)
        }
    };
    let mut fits = Vec::new();
    for feature in selected {
        let x: Vec<f64> = used
            .iter()
            .map(|o| {
                let paths = o.profile.feature_paths[&feature];
                match model {
                    FeatureModel::Presence => f64::from(u8::from(paths > 0)),
                    FeatureModel::PathCount => paths as f64,
                }
            })
            .collect();
        for outcome in RegressedOutcome::ALL {
            fits.push((
                feature.to_string(),
                outcome,
                used.len(),
                fit_univariate(&x, &used, outcome)?,
            ));
        }
    }
    finish(min_runs, fits, excluded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;

    fn at(seconds: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_600_000_000 + seconds, 0).unwrap()
    }

    fn runs(spec: &[(i64, Conclusion)]) -> Vec<RunRecord> {
        spec.iter()
            .enumerate()
            .map(|(i, (t, c))| RunRecord {
                workflow_id: "w".into(),
                commit_sha: format!("sha{i}"),
                committed_at: at(*t),
                conclusion: *c,
            })
            .collect()
    }

    fn window(a: i64, b: i64) -> Window {
        Window::new(at(a), at(b)).unwrap()
    }

    use Conclusion::{Cancelled, Failure, Skipped, Success};

    #[test]
    fn time_to_repair() {
        let m = reliability_metrics(
            "w",
            &runs(&[(0, Success), (10, Failure), (15, Failure), (30, Success)]),
            window(0, 100),
        );
        assert_eq!(m.ttr_seconds, Some(20.0));
        let never = reliability_metrics(
            "w",
            &runs(&[(0, Success), (10, Failure), (20, Cancelled)]),
            window(0, 100),
        );
        assert_eq!(never.ttr_seconds, None);
        let none = reliability_metrics("w", &runs(&[(0, Success)]), window(0, 100));
        assert_eq!(none.ttr_seconds, None);
    }

    #[test]
    fn availability_carry_forward() {
        let m = reliability_metrics(
            "w",
            &runs(&[(0, Success), (50, Failure), (80, Success)]),
            window(0, 100),
        );
        assert!((m.availability.unwrap() - 0.70).abs() < 1e-12);
        // backfill: failing from the start until the repair at 40
        let m = reliability_metrics("w", &runs(&[(20, Failure), (40, Success)]), window(0, 100));
        assert!((m.availability.unwrap() - 0.60).abs() < 1e-12);
        // still failing at the end of the window
        let m = reliability_metrics("w", &runs(&[(0, Success), (90, Failure)]), window(0, 100));
        assert!((m.availability.unwrap() - 0.90).abs() < 1e-12);
        let m = reliability_metrics("w", &runs(&[(5, Skipped)]), window(0, 100));
        assert_eq!((m.availability, m.failure_rate), (None, None));
        assert_eq!(m.n_commits, 1);
    }

    #[test]
    fn failure_rate_ignores_cancelled() {
        let plain = runs(&[(0, Success), (1, Failure), (2, Failure), (3, Success)]);
        let m = reliability_metrics("w", &plain, window(0, 10));
        assert_eq!(m.failure_rate, Some(0.5));
        let with_cancel = runs(&[
            (0, Success),
            (1, Failure),
            (2, Cancelled),
            (3, Failure),
            (4, Success),
        ]);
        let m2 = reliability_metrics("w", &with_cancel, window(0, 10));
        assert_eq!(m2.failure_rate, Some(0.5));
        assert_eq!(m2.n_runs, 5);
        assert_eq!(m2.n_runs_counted, 4);
    }

    #[test]
    fn all_success() {
        let m = reliability_metrics("w", &runs(&[(3, Success), (7, Success)]), window(0, 10));
        assert_eq!((m.failure_rate, m.availability), (Some(0.0), Some(1.0)));
    }

    #[test]
    fn commits_are_distinct_and_windowed() {
        let mut r = runs(&[(1, Success), (2, Failure), (200, Success)]);
        r[1].commit_sha = r[0].commit_sha.clone();
        let m = reliability_metrics("w", &r, window(0, 100));
        assert_eq!(m.n_commits, 1);
        assert_eq!(m.n_runs, 2);
    }

    #[test]
    fn record_loading() {
        let text = r#"{"workflow_id":"b","commit_sha":"1","committed_at":"2025-01-02T00:00:00Z","conclusion":"success"}
{"workflow_id":"a","commit_sha":"2","committed_at":"2025-01-03T00:00:00Z","conclusion":"timed_out"}
{"workflow_id":"a","commit_sha":"3","committed_at":"2025-01-01T00:00:00Z","conclusion":"failure"}"#;
        let log = load_run_records(text).unwrap();
        let order: Vec<_> = log.records.iter().map(|r| r.commit_sha.as_str()).collect();
        assert_eq!(order, ["3", "2", "1"]);
        assert_eq!(log.records[1].conclusion, Conclusion::Other);
        assert_eq!(log.warnings.len(), 1);

        let missing =
            "{\"workflow_id\":\"a\",\"commit_sha\":\"1\",\"conclusion\":\"success\"}\n\n{}";
        assert!(matches!(
            load_run_records(missing),
            Err(Error::Record { line: 1, .. })
        ));
        let round = load_run_records(&write_run_records(&log.records)).unwrap();
        assert_eq!(round.records, log.records);
    }

    #[test]
    fn conclusion_table() {
        for (s, c) in [
            ("success", Some(Success)),
            ("failure", Some(Failure)),
            ("cancelled", Some(Cancelled)),
            ("skipped", Some(Skipped)),
            ("other", Some(Conclusion::Other)),
            ("timed_out", None),
            ("neutral", None),
            ("", None),
        ] {
            assert_eq!(Conclusion::parse(s), c, "{s}");
        }
    }

    #[test]
    fn windows() {
        assert!("2025-01-20,2025-07-18".parse::<Window>().is_ok());
        assert!("2025-01-20T00:00:00Z,2025-07-18T12:00:00+02:00"
            .parse::<Window>()
            .is_ok());
        assert!("2025-07-18,2025-01-20".parse::<Window>().is_err());
        assert!("2025-01-20".parse::<Window>().is_err());
        let w = window(0, 10);
        assert!(w.contains(at(0)) && w.contains(at(10)) && !w.contains(at(11)));
        assert_eq!(w.end - w.start, Duration::seconds(10));
    }

    #[test]
    fn terciles() {
        let values: BTreeMap<String, f64> = (1..=9).map(|i| (format!("w{i}"), i as f64)).collect();
        let g = tercile_split(&values).unwrap();
        assert_eq!(g.small, ["w1", "w2", "w3"]);
        assert_eq!(g.medium, ["w4", "w5", "w6"]);
        assert_eq!(g.large, ["w7", "w8", "w9"]);
        let tied: BTreeMap<String, f64> = (0..9).map(|i| (format!("w{i}"), 1.0)).collect();
        assert!(matches!(
            tercile_split(&tied),
            Err(Error::DegenerateGrouping(_))
        ));
    }

    #[test]
    fn github_import() {
        let dump = r#"{"total_count":4,"workflow_runs":[
          {"path":".github/workflows/ci.yml","head_sha":"a1","event":"push","conclusion":"success","created_at":"2025-02-01T10:00:00Z","head_commit":{"timestamp":"2025-02-01T09:59:00Z"}},
          {"path":".github/workflows/ci.yml","head_sha":"a2","event":"pull_request","conclusion":"failure","created_at":"2025-02-02T10:00:00Z"},
          {"path":".github/workflows/ci.yml","head_sha":"a3","event":"push","conclusion":null,"created_at":"2025-02-03T10:00:00Z"},
          {"workflow_id":77,"head_sha":"a4","event":"push","conclusion":"startup_failure","created_at":"2025-02-04T10:00:00Z"}]}"#;
        let log = import_github_runs(dump).unwrap();
        assert_eq!(log.records.len(), 2);
        let ci = log.records.iter().find(|r| r.commit_sha == "a1").unwrap();
        assert_eq!(
            ci.committed_at,
            parse_timestamp("2025-02-01T09:59:00Z").unwrap()
        );
        assert_eq!(
            log.records
                .iter()
                .find(|r| r.commit_sha == "a4")
                .unwrap()
                .workflow_id,
            "77"
        );
        assert_eq!(log.warnings.len(), 1);
        assert!(import_github_runs("{}").is_err());
    }
}
