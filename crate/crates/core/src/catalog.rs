//! The known-construct inventory and the construct → feature taxonomy.
//!
//! The shipped catalog lists 197 constructs (119 workflow-level, 65
//! job-level, 13 step-level) grouped into 14 features. It is embedded in the
//! binary; `--catalog` or `WFLENS_CATALOG` loads a different file in the same
//! JSON format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::abstraction::{
    default_ruleset, AbstractionRuleSet, Construct, ConstructBag, ConstructSegment, RuleSpec,
};
use crate::error::{Error, Result};
use crate::workflow::ConcretePath;

const DEFAULT_CATALOG: &str = include_str!("../data/catalog.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Triggers,
    Permissions,
    WorkflowReuse,
    JobOrchestration,
    Containers,
    MatrixStrategy,
    Commands,
    Services,
    EnvironmentVariables,
    Naming,
    Context,
    ActionReuse,
    StepOrchestration,
    Deployment,
}

impl Feature {
    pub const ALL: [Feature; 14] = [
        Feature::Triggers,
        Feature::Permissions,
        Feature::WorkflowReuse,
        Feature::JobOrchestration,
        Feature::Containers,
        Feature::MatrixStrategy,
        Feature::Commands,
        Feature::Services,
        Feature::EnvironmentVariables,
        Feature::Naming,
        Feature::Context,
        Feature::ActionReuse,
        Feature::StepOrchestration,
        Feature::Deployment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Triggers => "triggers",
            Feature::Permissions => "permissions",
            Feature::WorkflowReuse => "workflow_reuse",
            Feature::JobOrchestration => "job_orchestration",
            Feature::Containers => "containers",
            Feature::MatrixStrategy => "matrix_strategy",
            Feature::Commands => "commands",
            Feature::Services => "services",
            Feature::EnvironmentVariables => "environment_variables",
            Feature::Naming => "naming",
            Feature::Context => "context",
            Feature::ActionReuse => "action_reuse",
            Feature::StepOrchestration => "step_orchestration",
            Feature::Deployment => "deployment",
        }
    }

    /// Number of constructs per feature in the reference taxonomy.
    pub fn reference_size(self) -> usize {
        match self {
            Feature::Triggers => 85,
            Feature::Permissions => 30,
            Feature::WorkflowReuse => 14,
            Feature::JobOrchestration => 12,
            Feature::Containers => 9,
            Feature::MatrixStrategy => 8,
            Feature::Commands => 7,
            Feature::Services => 7,
            Feature::EnvironmentVariables => 6,
            Feature::Naming => 5,
            Feature::Context => 5,
            Feature::ActionReuse => 3,
            Feature::StepOrchestration => 3,
            Feature::Deployment => 3,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::UnknownFeature(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Workflow,
    Job,
    Step,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Workflow => "workflow",
            Level::Job => "job",
            Level::Step => "step",
        }
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "workflow" => Ok(Level::Workflow),
            "job" => Ok(Level::Job),
            "step" => Ok(Level::Step),
            other => Err(Error::Catalog(format!("unknown level `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Active,
    Deprecated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub level: Level,
    /// `None` only in catalogs extracted from a corpus.
    pub feature: Option<Feature>,
    pub status: Status,
    pub provenance: String,
}

/// On-disk catalog format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogFile {
    pub version: String,
    #[serde(default)]
    pub rules: Vec<RuleSpec>,
    pub constructs: Vec<EntryRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryRecord {
    pub construct: String,
    pub level: String,
    pub feature: String,
    #[serde(default = "default_status")]
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

fn default_status() -> Status {
    Status::Active
}

#[derive(Clone, Debug)]
pub struct Catalog {
    version: String,
    entries: BTreeMap<Construct, CatalogEntry>,
    rules: AbstractionRuleSet,
}

pub(crate) fn default_catalog_file() -> &'static CatalogFile {
    static FILE: OnceLock<CatalogFile> = OnceLock::new();
    FILE.get_or_init(|| serde_json::from_str(DEFAULT_CATALOG).expect("shipped catalog parses"))
}

/// The embedded catalog.
pub fn default_catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        Catalog::from_file(default_catalog_file().clone()).expect("shipped catalog is valid")
    })
}

/// Reads a catalog file from disk.
pub fn load_catalog(path: &Path) -> Result<Catalog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Catalog::from_json(&text)
}

/// Level implied by a construct's leading segments.
pub fn infer_level(construct: &Construct) -> Level {
    let segments = construct.segments();
    let is_job = matches!(
        segments,
        [ConstructSegment::Key(jobs), ConstructSegment::Placeholder(_), ..] if jobs == "jobs"
    );
    if !is_job {
        return Level::Workflow;
    }
    match segments {
        [_, _, ConstructSegment::Key(steps), ConstructSegment::Wildcard, _, ..]
            if steps == "steps" =>
        {
            Level::Step
        }
        _ => Level::Job,
    }
}

impl Catalog {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CatalogFile = serde_json::from_str(text)?;
        Catalog::from_file(file)
    }

    pub fn from_file(file: CatalogFile) -> Result<Self> {
        let rules = AbstractionRuleSet::new(file.rules)?;
        let mut entries = BTreeMap::new();
        for record in file.constructs {
            let construct: Construct = record.construct.parse()?;
            let feature = match record.feature.as_str() {
                "unclassified" => None,
                name => Some(name.parse::<Feature>()?),
            };
            let entry = CatalogEntry {
                level: record.level.parse()?,
                feature,
                status: record.status,
                provenance: record.provenance.unwrap_or_else(|| "unspecified".into()),
            };
            if entries.insert(construct.clone(), entry).is_some() {
                return Err(Error::Catalog(format!("duplicate construct `{construct}`")));
            }
        }
        Ok(Catalog {
            version: file.version,
            entries,
            rules,
        })
    }

    pub fn to_file(&self) -> CatalogFile {
        CatalogFile {
            version: self.version.clone(),
            rules: self.rules.specs().to_vec(),
            constructs: self
                .entries
                .iter()
                .map(|(c, e)| EntryRecord {
                    construct: c.to_string(),
                    level: e.level.as_str().to_string(),
                    feature: e
                        .feature
                        .map_or("unclassified", Feature::as_str)
                        .to_string(),
                    status: e.status,
                    provenance: Some(e.provenance.clone()),
                })
                .collect(),
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn rules(&self) -> &AbstractionRuleSet {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, construct: &Construct) -> Option<&CatalogEntry> {
        self.entries.get(construct)
    }

    pub fn contains(&self, construct: &Construct) -> bool {
        self.entries.contains_key(construct)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Construct, &CatalogEntry)> {
        self.entries.iter()
    }

    /// Constructs mapped to `feature`.
    pub fn feature_size(&self, feature: Feature) -> usize {
        self.entries
            .values()
            .filter(|e| e.feature == Some(feature))
            .count()
    }

    /// A copy without `construct`; used to exercise validation failures.
    pub fn without(&self, construct: &Construct) -> Catalog {
        let mut copy = self.clone();
        copy.entries.remove(construct);
        copy
    }
}

/// Feature of a construct, or `None` when the catalog does not know it (or
/// knows it without a feature assignment).
pub fn classify(construct: &Construct, catalog: &Catalog) -> Option<Feature> {
    catalog.get(construct).and_then(|e| e.feature)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: usize,
    pub actual: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, expected: usize, actual: usize) -> Self {
        let name = name.into();
        let pass = expected == actual;
        let delta = (!pass).then(|| format!("{name}: {actual} ≠ {expected}"));
        Check {
            name,
            expected,
            actual,
            pass,
            delta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogReport {
    pub size: usize,
    pub levels: BTreeMap<Level, usize>,
    pub features: BTreeMap<Feature, usize>,
    pub unclassified: usize,
    pub level_mismatches: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl CatalogReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Checks a catalog against the reference taxonomy: total size, the level
/// split, per-feature counts, and structural consistency.
pub fn validate_catalog(catalog: &Catalog) -> CatalogReport {
    let mut levels = BTreeMap::from([(Level::Workflow, 0), (Level::Job, 0), (Level::Step, 0)]);
    let mut features: BTreeMap<Feature, usize> = Feature::ALL.iter().map(|f| (*f, 0)).collect();
    let mut unclassified = 0;
    let mut level_mismatches = Vec::new();
    for (construct, entry) in catalog.iter() {
        *levels.entry(entry.level).or_insert(0) += 1;
        match entry.feature {
            Some(f) => *features.entry(f).or_insert(0) += 1,
            None => unclassified += 1,
        }
        if infer_level(construct) != entry.level {
            level_mismatches.push(construct.to_string());
        }
    }
    let mut checks = vec![
        Check::new("total", 197, catalog.len()),
        Check::new("workflow-level", 119, levels[&Level::Workflow]),
        Check::new("job-level", 65, levels[&Level::Job]),
        Check::new("step-level", 13, levels[&Level::Step]),
    ];
    for feature in Feature::ALL {
        checks.push(Check::new(
            feature.as_str(),
            feature.reference_size(),
            features[&feature],
        ));
    }
    checks.push(Check::new("unclassified", 0, unclassified));
    checks.push(Check::new("level-mismatches", 0, level_mismatches.len()));
    let passed = checks.iter().all(|c| c.pass);
    CatalogReport {
        size: catalog.len(),
        levels,
        features,
        unclassified,
        level_mismatches,
        checks,
        passed,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnknownConstruct {
    pub construct: Construct,
    pub example: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub known: Vec<Construct>,
    pub unknown: Vec<UnknownConstruct>,
    pub is_language_valid: bool,
}

/// Splits a workflow's constructs into catalog-known and unknown ones.
pub fn validate_workflow(bag: &ConstructBag, catalog: &Catalog) -> ValidationReport {
    let mut known = Vec::new();
    let mut unknown = Vec::new();
    for construct in bag.constructs() {
        if catalog.contains(construct) {
            known.push(construct.clone());
        } else {
            let example: ConcretePath = bag
                .example(construct)
                .cloned()
                .unwrap_or_else(|| construct.to_concrete());
            unknown.push(UnknownConstruct {
                construct: construct.clone(),
                example: example.to_string(),
            });
        }
    }
    let is_language_valid = unknown.is_empty();
    ValidationReport {
        known,
        unknown,
        is_language_valid,
    }
}

/// Builds an unclassified catalog from the union of constructs seen in
/// `bags`. Levels are inferred from the leading segments.
pub fn extract_catalog(bags: &[ConstructBag]) -> Result<Catalog> {
    if bags.is_empty() {
        return Err(Error::Invalid(
            "cannot extract a catalog from zero workflows".into(),
        ));
    }
    let union: BTreeSet<&Construct> = bags.iter().flat_map(|b| b.constructs()).collect();
    let entries = union
        .into_iter()
        .map(|c| {
            let entry = CatalogEntry {
                level: infer_level(c),
                feature: None,
                status: Status::Active,
                provenance: "extracted".into(),
            };
            (c.clone(), entry)
        })
        .collect();
    Ok(Catalog {
        version: "extracted".into(),
        entries,
        rules: default_ruleset().clone(),
    })
}
