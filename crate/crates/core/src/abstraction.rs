//! Concrete paths to language constructs.
//!
//! User-defined keys (job ids, matrix variables, env names, `with` parameters,
//! service ids, input/output/secret ids) become `<id>`, `<var>`, `<param>` or
//! `<s_id>` placeholders, and every list index becomes `[*]`. Which positions
//! hold user-defined keys is data: the rule table ships inside the catalog
//! file.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workflow::{ConcretePath, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceholderKind {
    Id,
    Var,
    Param,
    SId,
}

impl PlaceholderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlaceholderKind::Id => "id",
            PlaceholderKind::Var => "var",
            PlaceholderKind::Param => "param",
            PlaceholderKind::SId => "s_id",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        match name {
            "id" => Some(PlaceholderKind::Id),
            "var" => Some(PlaceholderKind::Var),
            "param" => Some(PlaceholderKind::Param),
            "s_id" => Some(PlaceholderKind::SId),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstructSegment {
    Key(String),
    Wildcard,
    Placeholder(PlaceholderKind),
}

/// An abstract path: no concrete indices, placeholders where keys are
/// user-defined.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Construct {
    segments: Vec<ConstructSegment>,
}

impl Construct {
    pub fn segments(&self) -> &[ConstructSegment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Whether a single workflow can contain this construct at most once:
    /// true when it has neither a wildcard nor a placeholder.
    pub fn is_singular(&self) -> bool {
        self.segments
            .iter()
            .all(|s| matches!(s, ConstructSegment::Key(_)))
    }

    pub fn starts_with(&self, prefix: &Construct) -> bool {
        self.segments.starts_with(&prefix.segments)
    }

    /// The construct read back as a concrete path: placeholders become
    /// ordinary keys spelled `<kind>`, wildcards become index 0.
    pub fn to_concrete(&self) -> ConcretePath {
        let segments = self
            .segments
            .iter()
            .map(|s| match s {
                ConstructSegment::Key(k) => Segment::Key(k.clone()),
                ConstructSegment::Wildcard => Segment::Index(0),
                ConstructSegment::Placeholder(kind) => Segment::Key(format!("<{}>", kind.as_str())),
            })
            .collect();
        ConcretePath::new(segments).expect("constructs start with a key")
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Construct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, segment) in self.segments.iter().enumerate() {
            match segment {
                ConstructSegment::Wildcard => f.write_str("[*]")?,
                ConstructSegment::Key(k) => {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    f.write_str(k)?;
                }
                ConstructSegment::Placeholder(kind) => {
                    if i > 0 {
                        f.write_str(".")?;
                    }
                    write!(f, "<{}>", kind.as_str())?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Construct {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidConstruct(s.to_string());
        let mut segments = Vec::new();
        for part in s.split('.') {
            let (name, mut rest) = match part.find('[') {
                Some(i) => (&part[..i], &part[i..]),
                None => (part, ""),
            };
            if name.is_empty() {
                return Err(invalid());
            }
            let placeholder = name
                .strip_prefix('<')
                .and_then(|n| n.strip_suffix('>'))
                .and_then(PlaceholderKind::from_name);
            segments.push(match placeholder {
                Some(kind) => ConstructSegment::Placeholder(kind),
                None => ConstructSegment::Key(name.to_string()),
            });
            while !rest.is_empty() {
                rest = rest.strip_prefix("[*]").ok_or_else(invalid)?;
                segments.push(ConstructSegment::Wildcard);
            }
        }
        if !matches!(segments.first(), Some(ConstructSegment::Key(_))) {
            return Err(invalid());
        }
        Ok(Construct { segments })
    }
}

impl Serialize for Construct {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Construct {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One rule as written in the catalog file: keys directly below `parent`
/// are user-defined, except the reserved names in `except`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub parent: Construct,
    pub kind: PlaceholderKind,
    #[serde(default, rename = "except", skip_serializing_if = "Vec::is_empty")]
    pub reserved: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractionRuleSet {
    rules: HashMap<Vec<ConstructSegment>, (PlaceholderKind, Vec<String>)>,
    specs: Vec<RuleSpec>,
}

impl AbstractionRuleSet {
    /// Builds a rule set, rejecting two rules for the same position.
    pub fn new(specs: Vec<RuleSpec>) -> Result<Self> {
        let mut rules = HashMap::new();
        for spec in &specs {
            let previous = rules.insert(
                spec.parent.segments.clone(),
                (spec.kind, spec.reserved.clone()),
            );
            if previous.is_some() {
                return Err(Error::Catalog(format!(
                    "ambiguous abstraction rules for `{}`",
                    spec.parent
                )));
            }
        }
        Ok(AbstractionRuleSet { rules, specs })
    }

    pub fn specs(&self) -> &[RuleSpec] {
        &self.specs
    }

    /// Placeholder kind for a key found directly below `parent`, if the
    /// position is user-defined.
    pub fn lookup(&self, parent: &[ConstructSegment], key: &str) -> Option<PlaceholderKind> {
        self.rules
            .get(parent)
            .filter(|(_, reserved)| !reserved.iter().any(|r| r == key))
            .map(|(kind, _)| *kind)
    }
}

/// The shipped rule table.
pub fn default_ruleset() -> &'static AbstractionRuleSet {
    static RULES: OnceLock<AbstractionRuleSet> = OnceLock::new();
    RULES.get_or_init(|| {
        let file = crate::catalog::default_catalog_file();
        AbstractionRuleSet::new(file.rules.clone()).expect("shipped rules are unambiguous")
    })
}

/// `jobs.build.steps[0].uses` → `jobs.<id>.steps[*].uses`.
pub fn abstract_path(path: &ConcretePath, rules: &AbstractionRuleSet) -> Construct {
    let mut segments = Vec::with_capacity(path.len());
    for segment in path.segments() {
        let next = match segment {
            Segment::Index(_) => ConstructSegment::Wildcard,
            Segment::Key(key) => match rules.lookup(&segments, key) {
                Some(kind) => ConstructSegment::Placeholder(kind),
                None => ConstructSegment::Key(key.clone()),
            },
        };
        segments.push(next);
    }
    Construct { segments }
}

/// Occurrence counts of constructs within one workflow snapshot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstructBag {
    counts: BTreeMap<Construct, usize>,
    total_paths: usize,
    examples: BTreeMap<Construct, ConcretePath>,
}

impl ConstructBag {
    pub fn from_counts(counts: impl IntoIterator<Item = (Construct, usize)>) -> Self {
        let mut bag = ConstructBag::default();
        for (construct, n) in counts {
            if n > 0 {
                *bag.counts.entry(construct).or_insert(0) += n;
                bag.total_paths += n;
            }
        }
        bag
    }

    pub fn total_paths(&self) -> usize {
        self.total_paths
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total_paths == 0
    }

    pub fn count(&self, construct: &Construct) -> usize {
        self.counts.get(construct).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Construct, usize)> {
        self.counts.iter().map(|(c, n)| (c, *n))
    }

    pub fn constructs(&self) -> impl Iterator<Item = &Construct> {
        self.counts.keys()
    }

    /// First concrete path seen for `construct`, when the bag was built from
    /// paths.
    pub fn example(&self, construct: &Construct) -> Option<&ConcretePath> {
        self.examples.get(construct)
    }
}

pub fn abstract_workflow(paths: &[ConcretePath], rules: &AbstractionRuleSet) -> ConstructBag {
    let mut bag = ConstructBag::default();
    for path in paths {
        let construct = abstract_path(path, rules);
        bag.examples
            .entry(construct.clone())
            .or_insert_with(|| path.clone());
        *bag.counts.entry(construct).or_insert(0) += 1;
        bag.total_paths += 1;
    }
    bag
}
