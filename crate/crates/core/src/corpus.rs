//! Corpus-level frequency statistics and monthly evolution series.
//!
//! Quartiles everywhere use linear interpolation between order statistics
//! (R type 7). A workflow is alive at a month when one of its history
//! intervals contains the first UTC instant of that month; workflows that
//! live for less than 30 days are dropped from every month.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc};
use serde::{Deserialize, Serialize, Serializer};

use crate::abstraction::{Construct, ConstructBag};
use crate::catalog::Feature;
use crate::error::{Error, Result};
use crate::metrics::{to_f64, WorkflowMetrics};
use crate::stats::{gini, mann_kendall, mean, quantile_sorted, spearman, Summary, TestResult};

/// Minimum lifespan for a workflow to enter evolution snapshots.
pub const MIN_LIFESPAN_DAYS: i64 = 30;

/// `k` values reported in [`CorpusStats::topk_share`], besides the number of
/// distinct constructs.
pub const TOPK: [usize; 5] = [1, 5, 10, 15, 50];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructFreq {
    pub occurrences: usize,
    pub workflows_using: usize,
    /// Share of workflows using the construct, in [0, 1].
    pub pct_wf: f64,
    /// Median occurrences among workflows using the construct; `None` for
    /// constructs that can occur at most once per workflow.
    pub mow: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureDistribution {
    pub usage_rate: f64,
    /// Over workflows using the feature.
    pub coverage: Option<Summary>,
    pub ratio: Option<Summary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_workflows: usize,
    pub total_occurrences: usize,
    pub distinct_constructs: usize,
    pub construct_freq: BTreeMap<Construct, ConstructFreq>,
    pub feature_usage_rate: BTreeMap<Feature, f64>,
    pub gini: f64,
    pub topk_share: BTreeMap<usize, f64>,
    /// `None` when fewer than three workflows or a constant column.
    pub spearman_paths_constructs: Option<f64>,
    pub n_paths: Summary,
    pub n_constructs: Summary,
    pub n_features: Summary,
    pub path_construct_ratio: Summary,
    pub features: BTreeMap<Feature, FeatureDistribution>,
}

impl CorpusStats {
    /// Constructs ordered by total occurrences, most frequent first; ties by
    /// construct.
    pub fn most_frequent(&self, n: usize) -> Vec<(&Construct, &ConstructFreq)> {
        let mut all: Vec<_> = self.construct_freq.iter().collect();
        all.sort_by(|a, b| b.1.occurrences.cmp(&a.1.occurrences).then(a.0.cmp(b.0)));
        all.truncate(n);
        all
    }
}

fn summary(values: &[f64]) -> Summary {
    Summary::of(values).expect("non-empty corpus")
}

pub fn corpus_stats(items: &[(WorkflowMetrics, ConstructBag)]) -> Result<CorpusStats> {
    if items.is_empty() {
        return Err(Error::Invalid("corpus is empty".into()));
    }
    let n = items.len();
    let mut per_construct: BTreeMap<&Construct, Vec<usize>> = BTreeMap::new();
    for (_, bag) in items {
        for (construct, count) in bag.iter() {
            per_construct.entry(construct).or_default().push(count);
        }
    }
    let construct_freq: BTreeMap<Construct, ConstructFreq> = per_construct
        .iter()
        .map(|(construct, counts)| {
            let occurrences = counts.iter().sum();
            let mow = (!construct.is_singular()).then(|| {
                let mut v: Vec<f64> = counts.iter().map(|c| *c as f64).collect();
                v.sort_by(f64::total_cmp);
                quantile_sorted(&v, 0.5).unwrap_or(0.0)
            });
            let freq = ConstructFreq {
                occurrences,
                workflows_using: counts.len(),
                pct_wf: counts.len() as f64 / n as f64,
                mow,
            };
            ((*construct).clone(), freq)
        })
        .collect();

    let mut totals: Vec<f64> = construct_freq
        .values()
        .map(|f| f.occurrences as f64)
        .collect();
    let total_occurrences: usize = construct_freq.values().map(|f| f.occurrences).sum();
    let gini = gini(&totals)?;
    totals.sort_by(|a, b| b.total_cmp(a));
    let distinct = totals.len();
    let mut topk_share = BTreeMap::new();
    for k in TOPK.into_iter().chain([distinct]) {
        let top: f64 = totals.iter().take(k).sum();
        topk_share.insert(k, top / total_occurrences as f64);
    }

    let paths: Vec<f64> = items.iter().map(|(m, _)| m.n_paths as f64).collect();
    let constructs: Vec<f64> = items.iter().map(|(m, _)| m.n_constructs as f64).collect();
    let features: Vec<f64> = items.iter().map(|(m, _)| m.n_features as f64).collect();
    let ratios: Vec<f64> = items
        .iter()
        .map(|(m, _)| to_f64(m.path_construct_ratio))
        .collect();

    let mut feature_usage_rate = BTreeMap::new();
    let mut feature_dists = BTreeMap::new();
    for feature in Feature::ALL {
        let users: Vec<_> = items
            .iter()
            .map(|(m, _)| m.usage(feature))
            .filter(|u| u.present)
            .collect();
        let rate = users.len() as f64 / n as f64;
        let coverage: Vec<f64> = users.iter().map(|u| to_f64(u.construct_coverage)).collect();
        let ratio: Vec<f64> = users
            .iter()
            .filter_map(|u| u.capped_ratio.map(to_f64))
            .collect();
        feature_usage_rate.insert(feature, rate);
        feature_dists.insert(
            feature,
            FeatureDistribution {
                usage_rate: rate,
                coverage: Summary::of(&coverage),
                ratio: Summary::of(&ratio),
            },
        );
    }

    Ok(CorpusStats {
        n_workflows: n,
        total_occurrences,
        distinct_constructs: distinct,
        construct_freq,
        feature_usage_rate,
        gini,
        topk_share,
        spearman_paths_constructs: spearman(&paths, &constructs).ok(),
        n_paths: summary(&paths),
        n_constructs: summary(&constructs),
        n_features: summary(&features),
        path_construct_ratio: summary(&ratios),
        features: feature_dists,
    })
}

/// A calendar month.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Invalid(format!("month {month} out of range")));
        }
        Ok(YearMonth { year, month })
    }

    /// First instant of the month, UTC.
    pub fn start(self) -> DateTime<Utc> {
        let date = NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("validated month");
        Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight"))
    }

    pub fn next(self) -> YearMonth {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    pub fn of(t: DateTime<Utc>) -> YearMonth {
        YearMonth {
            year: t.year(),
            month: t.month(),
        }
    }

    /// Inclusive month range.
    pub fn range(from: YearMonth, to: YearMonth) -> Result<Vec<YearMonth>> {
        if from > to {
            return Err(Error::Invalid(format!("month range {from}..{to} is empty")));
        }
        let mut out = vec![from];
        while *out.last().unwrap() < to {
            out.push(out.last().unwrap().next());
        }
        Ok(out)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::Invalid(format!("expected YYYY-MM, got `{s}`"));
        let (y, m) = s.split_once('-').ok_or_else(invalid)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(invalid());
        }
        YearMonth::new(
            y.parse().map_err(|_| invalid())?,
            m.parse().map_err(|_| invalid())?,
        )
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One line of a history manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub workflow_id: String,
    pub repo: String,
    pub valid_from: DateTime<Utc>,
    pub valid_to: Option<DateTime<Utc>>,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub valid_from: DateTime<Utc>,
    /// Exclusive end; `None` while the workflow still exists.
    pub valid_to: Option<DateTime<Utc>>,
    pub file: String,
}

impl Interval {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.valid_from <= t && self.valid_to.is_none_or(|end| t < end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkflowHistory {
    pub workflow_id: String,
    pub repo: String,
    pub intervals: Vec<Interval>,
}

impl WorkflowHistory {
    /// Sorts intervals and rejects overlaps.
    pub fn new(workflow_id: String, repo: String, mut intervals: Vec<Interval>) -> Result<Self> {
        intervals.sort_by_key(|iv| iv.valid_from);
        for pair in intervals.windows(2) {
            let overlaps = match pair[0].valid_to {
                None => true,
                Some(end) => end > pair[1].valid_from,
            };
            if overlaps {
                return Err(Error::OverlappingIntervals(workflow_id));
            }
        }
        for iv in &intervals {
            if iv.valid_to.is_some_and(|end| end <= iv.valid_from) {
                return Err(Error::Invalid(format!(
                    "empty interval in history of `{workflow_id}`"
                )));
            }
        }
        Ok(WorkflowHistory {
            workflow_id,
            repo,
            intervals,
        })
    }

    /// Time from the first interval's start to the last one's end, with open
    /// intervals running to `horizon`.
    pub fn lifespan(&self, horizon: DateTime<Utc>) -> Duration {
        let (Some(first), Some(last)) = (self.intervals.first(), self.intervals.last()) else {
            return Duration::zero();
        };
        last.valid_to.unwrap_or(horizon) - first.valid_from
    }
}

/// Parses a JSONL manifest (blank lines ignored).
pub fn parse_manifest(text: &str) -> Result<Vec<HistoryRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| Error::Record {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Groups manifest records per workflow, ordered by `workflow_id`.
pub fn group_histories(records: Vec<HistoryRecord>) -> Result<Vec<WorkflowHistory>> {
    let mut grouped: BTreeMap<String, (String, Vec<Interval>)> = BTreeMap::new();
    for r in records {
        let entry = grouped
            .entry(r.workflow_id)
            .or_insert_with(|| (r.repo, Vec::new()));
        entry.1.push(Interval {
            valid_from: r.valid_from,
            valid_to: r.valid_to,
            file: r.file,
        });
    }
    grouped
        .into_iter()
        .map(|(id, (repo, intervals))| WorkflowHistory::new(id, repo, intervals))
        .collect()
}

pub fn load_manifest(path: &Path) -> Result<Vec<WorkflowHistory>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    group_histories(parse_manifest(&text)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SnapshotRef {
    pub workflow_id: String,
    pub repo: String,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonthSnapshot {
    pub month: YearMonth,
    pub snapshots: Vec<SnapshotRef>,
}

/// For each month, the snapshot of every workflow alive at the month's
/// first instant. Open intervals count as alive through the end of the last
/// requested month when measuring lifespan.
pub fn materialize_snapshots(
    histories: &[WorkflowHistory],
    months: &[YearMonth],
) -> Result<Vec<MonthSnapshot>> {
    if months.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("months must be strictly increasing".into()));
    }
    let Some(last) = months.last() else {
        return Ok(Vec::new());
    };
    let horizon = last.next().start();
    let mut seen = BTreeSet::new();
    for h in histories {
        if !seen.insert(&h.workflow_id) {
            return Err(Error::OverlappingIntervals(h.workflow_id.clone()));
        }
    }
    let mut ordered: Vec<&WorkflowHistory> = histories
        .iter()
        .filter(|h| h.lifespan(horizon) >= Duration::days(MIN_LIFESPAN_DAYS))
        .collect();
    ordered.sort_by(|a, b| a.workflow_id.cmp(&b.workflow_id));
    Ok(months
        .iter()
        .map(|&month| {
            let instant = month.start();
            let snapshots = ordered
                .iter()
                .filter_map(|h| {
                    h.intervals
                        .iter()
                        .find(|iv| iv.contains(instant))
                        .map(|iv| SnapshotRef {
                            workflow_id: h.workflow_id.clone(),
                            repo: h.repo.clone(),
                            file: iv.file.clone(),
                        })
                })
                .collect();
            MonthSnapshot { month, snapshots }
        })
        .collect())
}

/// Per-workflow quantity tracked over time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesMetric {
    Paths,
    Constructs,
    Features,
    PathConstructRatio,
    /// Share of alive workflows using the feature.
    UsageRate(Feature),
}

impl SeriesMetric {
    pub fn value(self, m: &WorkflowMetrics) -> f64 {
        match self {
            SeriesMetric::Paths => m.n_paths as f64,
            SeriesMetric::Constructs => m.n_constructs as f64,
            SeriesMetric::Features => m.n_features as f64,
            SeriesMetric::PathConstructRatio => to_f64(m.path_construct_ratio),
            SeriesMetric::UsageRate(f) => f64::from(u8::from(m.usage(f).present)),
        }
    }
}

impl fmt::Display for SeriesMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesMetric::Paths => f.write_str("n_paths"),
            SeriesMetric::Constructs => f.write_str("n_constructs"),
            SeriesMetric::Features => f.write_str("n_features"),
            SeriesMetric::PathConstructRatio => f.write_str("path_construct_ratio"),
            SeriesMetric::UsageRate(feature) => write!(f, "usage:{feature}"),
        }
    }
}

impl FromStr for SeriesMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_paths" => Ok(SeriesMetric::Paths),
            "n_constructs" => Ok(SeriesMetric::Constructs),
            "n_features" => Ok(SeriesMetric::Features),
            "path_construct_ratio" => Ok(SeriesMetric::PathConstructRatio),
            other => match other.strip_prefix("usage:") {
                Some(feature) => Ok(SeriesMetric::UsageRate(feature.parse()?)),
                None => Err(Error::Invalid(format!("unknown series metric `{other}`"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub month: YearMonth,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionSeries {
    pub metric: String,
    pub points: Vec<SeriesPoint>,
}

/// Aggregate used when testing a series for trend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregate {
    Mean,
    Median,
    Q1,
    Q3,
}

impl FromStr for Aggregate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregate::Mean),
            "median" => Ok(Aggregate::Median),
            "q1" => Ok(Aggregate::Q1),
            "q3" => Ok(Aggregate::Q3),
            other => Err(Error::Invalid(format!("unknown aggregate `{other}`"))),
        }
    }
}

impl EvolutionSeries {
    pub fn values(&self, agg: Aggregate) -> Vec<f64> {
        self.points
            .iter()
            .filter_map(|p| match agg {
                Aggregate::Mean => p.mean,
                Aggregate::Median => p.median,
                Aggregate::Q1 => p.q1,
                Aggregate::Q3 => p.q3,
            })
            .collect()
    }

    /// Mann-Kendall test over the chosen aggregate, skipping empty months.
    pub fn trend(&self, agg: Aggregate) -> Result<TestResult> {
        mann_kendall(&self.values(agg))
    }

    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        let mut out = String::from("month,mean,median,q1,q3,n\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.month,
                cell(p.mean),
                cell(p.median),
                cell(p.q1),
                cell(p.q3),
                p.n
            ));
        }
        out
    }
}

/// Builds a monthly series from per-snapshot values. `value` returns `None`
/// for snapshots that cannot be measured; those are left out of the month.
pub fn evolution_series(
    metric: impl Into<String>,
    monthly: &[MonthSnapshot],
    mut value: impl FnMut(&SnapshotRef) -> Option<f64>,
) -> Result<EvolutionSeries> {
    if monthly.is_empty() {
        return Err(Error::Invalid(
            "evolution series needs at least one month".into(),
        ));
    }
    let points = monthly
        .iter()
        .map(|m| {
            let mut values: Vec<f64> = m.snapshots.iter().filter_map(&mut value).collect();
            values.sort_by(f64::total_cmp);
            SeriesPoint {
                month: m.month,
                mean: mean(&values),
                median: quantile_sorted(&values, 0.5),
                q1: quantile_sorted(&values, 0.25),
                q3: quantile_sorted(&values, 0.75),
                n: values.len(),
            }
        })
        .collect();
    Ok(EvolutionSeries {
        metric: metric.into(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{abstract_workflow, default_ruleset};
    use crate::catalog::default_catalog;
    use crate::metrics::workflow_metrics;
    use crate::workflow::{enumerate_paths, parse_workflow};

    fn t(s: &str) -> DateTime<Utc> {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn item(bag: ConstructBag) -> (WorkflowMetrics, ConstructBag) {
        (workflow_metrics(&bag, default_catalog()).unwrap(), bag)
    }

    fn c(s: &str) -> Construct {
        s.parse().unwrap()
    }

    #[test]
    fn matrix_build_corpus() {
        let tree = parse_workflow(include_str!("../tests/fixtures/matrix_build.yml")).unwrap();
        let bag = abstract_workflow(&enumerate_paths(&tree), default_ruleset());
        let stats = corpus_stats(&[item(bag)]).unwrap();
        assert_eq!(stats.distinct_constructs, 19);
        assert_eq!(stats.total_occurrences, 26);
        assert!(stats.construct_freq.values().all(|f| f.pct_wf == 1.0));
        let counts: Vec<f64> = stats
            .construct_freq
            .values()
            .map(|f| f.occurrences as f64)
            .collect();
        assert_eq!(stats.gini, gini(&counts).unwrap());
        assert_eq!(stats.topk_share[&19], 1.0);
        assert_eq!(stats.construct_freq[&c("name")].mow, None);
        assert_eq!(
            stats.construct_freq[&c("jobs.<id>.steps[*]")].mow,
            Some(3.0)
        );
        assert_eq!(stats.spearman_paths_constructs, None);
    }

    #[test]
    fn equal_corpus_has_zero_gini() {
        let bag = ConstructBag::from_counts([(c("name"), 1), (c("on"), 1), (c("jobs"), 1)]);
        let stats = corpus_stats(&[item(bag.clone()), item(bag)]).unwrap();
        assert_eq!(stats.gini, 0.0);
        assert!(corpus_stats(&[]).is_err());
    }

    #[test]
    fn frequencies_and_mow() {
        let a = ConstructBag::from_counts([(c("jobs.<id>.steps[*].run"), 4), (c("name"), 1)]);
        let b = ConstructBag::from_counts([(c("jobs.<id>.steps[*].run"), 1)]);
        let d = ConstructBag::from_counts([(c("jobs.<id>.steps[*].uses"), 2)]);
        let stats = corpus_stats(&[item(a), item(b), item(d)]).unwrap();
        let run = &stats.construct_freq[&c("jobs.<id>.steps[*].run")];
        assert_eq!((run.occurrences, run.workflows_using), (5, 2));
        assert_eq!(run.mow, Some(2.5));
        assert!((run.pct_wf - 2.0 / 3.0).abs() < 1e-15);
        assert!((stats.feature_usage_rate[&Feature::Commands] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(stats.topk_share[&1], 5.0 / 8.0);
        assert_eq!(stats.most_frequent(1)[0].0, &c("jobs.<id>.steps[*].run"));
        assert_eq!(stats.n_paths.median, 2.0);
    }

    #[test]
    fn year_months() {
        assert_eq!(ym("2020-02").start(), t("2020-02-01T00:00:00Z"));
        assert_eq!(ym("2020-12").next(), ym("2021-01"));
        assert_eq!(
            YearMonth::range(ym("2020-11"), ym("2021-02"))
                .unwrap()
                .len(),
            4
        );
        assert!("2020-13".parse::<YearMonth>().is_err());
        assert!("20-01".parse::<YearMonth>().is_err());
        assert!(YearMonth::range(ym("2021-01"), ym("2020-01")).is_err());
    }

    fn history(id: &str, spans: &[(&str, Option<&str>)]) -> WorkflowHistory {
        let intervals = spans
            .iter()
            .enumerate()
            .map(|(i, (from, to))| Interval {
                valid_from: t(from),
                valid_to: to.map(t),
                file: format!("{id}-{i}.yml"),
            })
            .collect();
        WorkflowHistory::new(id.into(), "r".into(), intervals).unwrap()
    }

    #[test]
    fn snapshot_selection() {
        let h = history(
            "w",
            &[
                ("2020-01-15T00:00:00Z", Some("2020-01-25T00:00:00Z")),
                ("2020-01-25T00:00:00Z", Some("2020-03-10T00:00:00Z")),
            ],
        );
        let months = YearMonth::range(ym("2020-01"), ym("2020-04")).unwrap();
        let snaps = materialize_snapshots(&[h], &months).unwrap();
        let sizes: Vec<usize> = snaps.iter().map(|m| m.snapshots.len()).collect();
        assert_eq!(sizes, vec![0, 1, 1, 0]);
        assert_eq!(snaps[1].snapshots[0].file, "w-1.yml");

        let short = history(
            "s",
            &[("2020-01-20T00:00:00Z", Some("2020-02-09T00:00:00Z"))],
        );
        let snaps = materialize_snapshots(&[short], &months).unwrap();
        assert!(snaps.iter().all(|m| m.snapshots.is_empty()));

        assert!(materialize_snapshots(&[], &months)
            .unwrap()
            .iter()
            .all(|m| m.snapshots.is_empty()));
        assert!(materialize_snapshots(&[], &[ym("2020-02"), ym("2020-01")]).is_err());
    }

    #[test]
    fn open_interval_lifespan_uses_horizon() {
        let h = history("o", &[("2020-03-15T00:00:00Z", None)]);
        // alive through the end of April: 47 days
        let two = materialize_snapshots(std::slice::from_ref(&h), &[ym("2020-03"), ym("2020-04")])
            .unwrap();
        assert_eq!(two[1].snapshots.len(), 1);
        // horizon 2020-04-01: 17 days, excluded
        let one = materialize_snapshots(&[h], &[ym("2020-03")]).unwrap();
        assert!(one[0].snapshots.is_empty());
    }

    #[test]
    fn overlap_rejected() {
        let intervals = vec![
            Interval {
                valid_from: t("2020-01-01T00:00:00Z"),
                valid_to: Some(t("2020-03-01T00:00:00Z")),
                file: "a".into(),
            },
            Interval {
                valid_from: t("2020-02-01T00:00:00Z"),
                valid_to: None,
                file: "b".into(),
            },
        ];
        let err = WorkflowHistory::new("dup".into(), "r".into(), intervals).unwrap_err();
        assert_eq!(
            err.to_string(),
            "overlapping history intervals for workflow `dup`"
        );
    }

    #[test]
    fn manifest_parsing() {
        let text = r#"{"workflow_id":"a","repo":"o/r","valid_from":"2020-01-01T00:00:00Z","valid_to":null,"file":"a.yml"}

{"workflow_id":"b","repo":"o/r","valid_from":"2020-01-01T00:00:00Z","valid_to":"2020-05-01T00:00:00Z","file":"b.yml"}"#;
        let histories = group_histories(parse_manifest(text).unwrap()).unwrap();
        assert_eq!(histories.len(), 2);
        let err = parse_manifest("{\"workflow_id\":1}").unwrap_err();
        assert!(matches!(err, Error::Record { line: 1, .. }));
    }

    #[test]
    fn series_aggregates() {
        let months = YearMonth::range(ym("2020-01"), ym("2020-03")).unwrap();
        let monthly: Vec<MonthSnapshot> = months
            .iter()
            .map(|&month| MonthSnapshot {
                month,
                snapshots: (0..4)
                    .map(|i| SnapshotRef {
                        workflow_id: format!("w{i}"),
                        repo: "r".into(),
                        file: format!("{}", (i + 1) * month.month as usize),
                    })
                    .collect(),
            })
            .collect();
        let series = evolution_series("n_paths", &monthly, |s| s.file.parse().ok()).unwrap();
        assert_eq!(series.values(Aggregate::Median), vec![2.5, 5.0, 7.5]);
        assert_eq!(series.points[0].q1, Some(1.75));
        assert!(series
            .to_csv()
            .starts_with("month,mean,median,q1,q3,n\n2020-01,2.5,2.5,1.75,3.25,4\n"));

        let empty = evolution_series("x", &monthly, |_| None).unwrap();
        assert_eq!(empty.points[0].n, 0);
        assert_eq!(empty.points[0].median, None);
        assert!(evolution_series("x", &[], |_| None).is_err());
    }

    #[test]
    fn series_metric_names() {
        for name in [
            "n_paths",
            "n_constructs",
            "n_features",
            "path_construct_ratio",
            "usage:permissions",
        ] {
            assert_eq!(name.parse::<SeriesMetric>().unwrap().to_string(), name);
        }
        assert!("usage:nope".parse::<SeriesMetric>().is_err());
    }
}
