//! Per-workflow size and per-feature usage.
//!
//! Ratios are exact rationals; they are rounded to four decimals only when
//! serialized.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::abstraction::{Construct, ConstructBag};
use crate::catalog::{classify, Catalog, Feature};
use crate::error::{Error, Result};

/// Path-to-construct ratios above this are clipped in `capped_ratio`.
pub const RATIO_CAP: i64 = 10;

/// The four size measures used for grouping, regression and linting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeMetric {
    NPaths,
    NConstructs,
    NFeatures,
    PathConstructRatio,
}

impl SizeMetric {
    pub const ALL: [SizeMetric; 4] = [
        SizeMetric::NPaths,
        SizeMetric::NConstructs,
        SizeMetric::NFeatures,
        SizeMetric::PathConstructRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SizeMetric::NPaths => "n_paths",
            SizeMetric::NConstructs => "n_constructs",
            SizeMetric::NFeatures => "n_features",
            SizeMetric::PathConstructRatio => "path_construct_ratio",
        }
    }

    pub fn value(self, m: &WorkflowMetrics) -> f64 {
        match self {
            SizeMetric::NPaths => m.n_paths as f64,
            SizeMetric::NConstructs => m.n_constructs as f64,
            SizeMetric::NFeatures => m.n_features as f64,
            SizeMetric::PathConstructRatio => to_f64(m.path_construct_ratio),
        }
    }
}

impl std::fmt::Display for SizeMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SizeMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SizeMetric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown size metric `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureUsage {
    pub present: bool,
    pub n_paths: usize,
    pub n_constructs_used: usize,
    pub construct_coverage: Rational64,
    pub path_to_construct_ratio: Option<Rational64>,
    pub capped_ratio: Option<Rational64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkflowMetrics {
    pub n_paths: usize,
    pub n_constructs: usize,
    pub n_features: usize,
    pub path_construct_ratio: Rational64,
    pub per_feature: BTreeMap<Feature, FeatureUsage>,
    /// Constructs absent from the catalog; counted in the size fields only.
    pub unknown_constructs: Vec<Construct>,
    pub unknown_paths: usize,
}

impl WorkflowMetrics {
    pub fn features_present(&self) -> impl Iterator<Item = Feature> + '_ {
        self.per_feature
            .iter()
            .filter(|(_, u)| u.present)
            .map(|(f, _)| *f)
    }

    pub fn usage(&self, feature: Feature) -> &FeatureUsage {
        &self.per_feature[&feature]
    }
}

fn ratio(num: usize, den: usize) -> Rational64 {
    Rational64::new(num as i64, den as i64)
}

/// Rounds a rational to four decimals for output.
pub fn round4(r: Rational64) -> f64 {
    let value = *r.numer() as f64 / *r.denom() as f64;
    (value * 1e4).round() / 1e4
}

/// Float value of a rational, unrounded.
pub fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn feature_usage(bag: &ConstructBag, catalog: &Catalog, feature: Feature) -> FeatureUsage {
    let (n_paths, n_constructs_used) = bag
        .iter()
        .filter(|(c, _)| classify(c, catalog) == Some(feature))
        .fold((0, 0), |(p, c), (_, n)| (p + n, c + 1));
    usage_from_counts(n_paths, n_constructs_used, catalog.feature_size(feature))
}

fn usage_from_counts(
    n_paths: usize,
    n_constructs_used: usize,
    catalog_size: usize,
) -> FeatureUsage {
    let present = n_paths > 0;
    let construct_coverage = if catalog_size == 0 {
        Rational64::from_integer(0)
    } else {
        ratio(n_constructs_used, catalog_size)
    };
    let path_to_construct_ratio = present.then(|| ratio(n_paths, n_constructs_used));
    let cap = Rational64::from_integer(RATIO_CAP);
    FeatureUsage {
        present,
        n_paths,
        n_constructs_used,
        construct_coverage,
        path_to_construct_ratio,
        capped_ratio: path_to_construct_ratio.map(|r| r.min(cap)),
    }
}

pub fn workflow_metrics(bag: &ConstructBag, catalog: &Catalog) -> Result<WorkflowMetrics> {
    if bag.is_empty() {
        return Err(Error::EmptyWorkflow);
    }
    let mut counts: BTreeMap<Feature, (usize, usize)> = BTreeMap::new();
    let mut unknown_constructs = Vec::new();
    let mut unknown_paths = 0;
    for (construct, n) in bag.iter() {
        match classify(construct, catalog) {
            Some(feature) => {
                let entry = counts.entry(feature).or_insert((0, 0));
                entry.0 += n;
                entry.1 += 1;
            }
            None => {
                if !catalog.contains(construct) {
                    unknown_constructs.push(construct.clone());
                }
                unknown_paths += n;
            }
        }
    }
    let per_feature: BTreeMap<Feature, FeatureUsage> = Feature::ALL
        .iter()
        .map(|f| {
            let (paths, constructs) = counts.get(f).copied().unwrap_or((0, 0));
            (
                *f,
                usage_from_counts(paths, constructs, catalog.feature_size(*f)),
            )
        })
        .collect();
    Ok(WorkflowMetrics {
        n_paths: bag.total_paths(),
        n_constructs: bag.distinct(),
        n_features: counts.len(),
        path_construct_ratio: ratio(bag.total_paths(), bag.distinct()),
        per_feature,
        unknown_constructs,
        unknown_paths,
    })
}

impl Serialize for FeatureUsage {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(6))?;
        map.serialize_entry("present", &self.present)?;
        map.serialize_entry("n_paths", &self.n_paths)?;
        map.serialize_entry("n_constructs_used", &self.n_constructs_used)?;
        map.serialize_entry("construct_coverage", &round4(self.construct_coverage))?;
        map.serialize_entry(
            "path_to_construct_ratio",
            &self.path_to_construct_ratio.map(round4),
        )?;
        map.serialize_entry("capped_ratio", &self.capped_ratio.map(round4))?;
        map.end()
    }
}

/// One record of `wflens scan` output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRecord {
    pub file: String,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_constructs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_features: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_construct_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<BTreeMap<Feature, FeatureUsage>>,
    pub unknown_constructs: Vec<Construct>,
}

impl ScanRecord {
    pub fn from_metrics(file: impl Into<String>, metrics: &WorkflowMetrics) -> Self {
        ScanRecord {
            file: file.into(),
            valid: metrics.unknown_constructs.is_empty(),
            error: None,
            n_paths: Some(metrics.n_paths),
            n_constructs: Some(metrics.n_constructs),
            n_features: Some(metrics.n_features),
            path_construct_ratio: Some(round4(metrics.path_construct_ratio)),
            features: Some(metrics.per_feature.clone()),
            unknown_constructs: metrics.unknown_constructs.clone(),
        }
    }

    pub fn failed(file: impl Into<String>, error: &Error) -> Self {
        ScanRecord {
            file: file.into(),
            valid: false,
            error: Some(error.to_string()),
            n_paths: None,
            n_constructs: None,
            n_features: None,
            path_construct_ratio: None,
            features: None,
            unknown_constructs: Vec::new(),
        }
    }
}
