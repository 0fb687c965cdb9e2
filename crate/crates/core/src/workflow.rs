//! Workflow documents as YAML trees, and the concrete paths inside them.
//!
//! A path addresses one mapping entry or one sequence item, starting from a
//! top-level key: `jobs.build.steps[0].uses`. Interior entries are paths too,
//! so `jobs`, `jobs.build` and `jobs.build.steps` are all enumerated. Scalar
//! values ride along as payload of the path that owns them.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser, Tag};
use yaml_rust2::scanner::{Marker, TScalarStyle};

use crate::error::{Error, Result};

/// Upper bound on nodes materialized while expanding aliases.
const MAX_NODES: usize = 1_000_000;

/// YAML 1.1 spellings of boolean true. A top-level key spelled like this is
/// what YAML 1.1 loaders turn into `true`; the platform reads it as `on`.
const YAML11_TRUE: &[&str] = &[
    "y", "Y", "yes", "Yes", "YES", "true", "True", "TRUE", "on", "On", "ON",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    String,
    Int,
    Float,
    Bool,
    Null,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scalar {
    pub value: String,
    pub kind: ScalarKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Mapping(Vec<(String, Node)>),
    Sequence(Vec<Node>),
    Scalar(Scalar),
}

impl Node {
    fn size(&self) -> usize {
        match self {
            Node::Mapping(entries) => 1 + entries.iter().map(|(_, n)| n.size()).sum::<usize>(),
            Node::Sequence(items) => 1 + items.iter().map(Node::size).sum::<usize>(),
            Node::Scalar(_) => 1,
        }
    }
}

/// A parsed workflow document. The root is always a mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkflowTree {
    root: Node,
}

impl WorkflowTree {
    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Top-level keys in document order.
    pub fn top_level_keys(&self) -> Vec<&str> {
        match &self.root {
            Node::Mapping(entries) => entries.iter().map(|(k, _)| k.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Key(String),
    Index(usize),
}

/// A dotted address of one node. The segment list is the identity; the
/// rendered string is lossy for keys containing `.` or `[`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConcretePath {
    segments: Vec<Segment>,
}

impl ConcretePath {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        match segments.first() {
            Some(Segment::Key(_)) => Ok(ConcretePath { segments }),
            _ => Err(Error::InvalidPath(format!("{segments:?}"))),
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn render(&self) -> String {
        render_path(self)
    }
}

impl fmt::Display for ConcretePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_path(self))
    }
}

impl FromStr for ConcretePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for part in s.split('.') {
            let (name, mut rest) = match part.find('[') {
                Some(i) => (&part[..i], &part[i..]),
                None => (part, ""),
            };
            if name.is_empty() {
                if segments.is_empty() {
                    return Err(Error::InvalidPath(s.to_string()));
                }
            } else {
                segments.push(Segment::Key(name.to_string()));
            }
            while !rest.is_empty() {
                let close = rest
                    .find(']')
                    .ok_or_else(|| Error::InvalidPath(s.to_string()))?;
                let index = rest[1..close]
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPath(s.to_string()))?;
                segments.push(Segment::Index(index));
                rest = &rest[close + 1..];
                if !rest.is_empty() && !rest.starts_with('[') {
                    return Err(Error::InvalidPath(s.to_string()));
                }
            }
        }
        ConcretePath::new(segments).map_err(|_| Error::InvalidPath(s.to_string()))
    }
}

/// Renders `[key(jobs), key(build), key(steps), index(0), key(uses)]` as
/// `jobs.build.steps[0].uses`.
pub fn render_path(path: &ConcretePath) -> String {
    let mut out = String::new();
    for (i, segment) in path.segments.iter().enumerate() {
        match segment {
            Segment::Key(k) => {
                if i > 0 {
                    out.push('.');
                }
                out.push_str(k);
            }
            Segment::Index(n) => {
                out.push('[');
                out.push_str(&n.to_string());
                out.push(']');
            }
        }
    }
    out
}

/// Outcome of reading one workflow file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParseReport {
    pub valid: bool,
    #[serde(serialize_with = "serialize_paths")]
    pub paths: Vec<ConcretePath>,
    pub parse_errors: Vec<ParseError>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl From<&Error> for ParseError {
    fn from(err: &Error) -> Self {
        match err {
            Error::Yaml {
                line,
                column,
                message,
            } => ParseError {
                line: Some(*line),
                column: Some(*column),
                message: message.clone(),
            },
            Error::DuplicateKey { line, column, .. } => ParseError {
                line: Some(*line),
                column: Some(*column),
                message: err.to_string(),
            },
            other => ParseError {
                line: None,
                column: None,
                message: other.to_string(),
            },
        }
    }
}

fn serialize_paths<S: serde::Serializer>(
    paths: &[ConcretePath],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(paths.iter().map(render_path))
}

/// Parses one workflow document.
///
/// Anchors and aliases are expanded, a leading BOM is dropped, and a
/// top-level key that YAML 1.1 would read as boolean true becomes `on`.
pub fn parse_workflow(text: &str) -> Result<WorkflowTree> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut builder = TreeBuilder::default();
    let mut parser = Parser::new_from_str(text);
    if let Err(e) = parser.load(&mut builder, true) {
        return Err(Error::Yaml {
            line: e.marker().line(),
            column: e.marker().col() + 1,
            message: e.info().to_string(),
        });
    }
    if let Some(err) = builder.error {
        return Err(err);
    }
    if builder.documents > 1 {
        return Err(Error::MultipleDocuments);
    }
    match builder.root {
        Some(root @ Node::Mapping(_)) => Ok(WorkflowTree { root }),
        Some(Node::Scalar(Scalar {
            kind: ScalarKind::Null,
            ..
        }))
        | None => Err(Error::EmptyDocument),
        Some(_) => Err(Error::Invalid("workflow root must be a mapping".into())),
    }
}

/// Every mapping entry and sequence item, at every depth, in document order.
pub fn enumerate_paths(tree: &WorkflowTree) -> Vec<ConcretePath> {
    enumerate_entries(tree)
        .into_iter()
        .map(|(p, _)| p)
        .collect()
}

/// Like [`enumerate_paths`], with the scalar payload of each path (if the
/// path owns a scalar).
pub fn enumerate_entries(tree: &WorkflowTree) -> Vec<(ConcretePath, Option<&Scalar>)> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    walk(&tree.root, &mut prefix, &mut out);
    out
}

fn walk<'t>(
    node: &'t Node,
    prefix: &mut Vec<Segment>,
    out: &mut Vec<(ConcretePath, Option<&'t Scalar>)>,
) {
    let visit = |segment: Segment, child: &'t Node, prefix: &mut Vec<Segment>, out: &mut Vec<_>| {
        prefix.push(segment);
        let payload = match child {
            Node::Scalar(s) => Some(s),
            _ => None,
        };
        out.push((
            ConcretePath {
                segments: prefix.clone(),
            },
            payload,
        ));
        walk(child, prefix, out);
        prefix.pop();
    };
    match node {
        Node::Mapping(entries) => {
            for (key, child) in entries {
                visit(Segment::Key(key.clone()), child, prefix, out);
            }
        }
        Node::Sequence(items) => {
            for (i, child) in items.iter().enumerate() {
                visit(Segment::Index(i), child, prefix, out);
            }
        }
        Node::Scalar(_) => {}
    }
}

fn resolve_plain(value: &str) -> ScalarKind {
    match value {
        "" | "~" | "null" | "Null" | "NULL" => return ScalarKind::Null,
        "true" | "True" | "TRUE" | "false" | "False" | "FALSE" => return ScalarKind::Bool,
        ".inf" | ".Inf" | ".INF" | "-.inf" | "-.Inf" | "-.INF" | "+.inf" | ".nan" | ".NaN"
        | ".NAN" => return ScalarKind::Float,
        _ => {}
    }
    let unsigned = value.strip_prefix(['-', '+']).unwrap_or(value);
    if !unsigned.is_empty() && unsigned.bytes().all(|b| b.is_ascii_digit()) {
        return ScalarKind::Int;
    }
    if let Some(hex) = value.strip_prefix("0x") {
        if !hex.is_empty() && hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return ScalarKind::Int;
        }
    }
    if let Some(oct) = value.strip_prefix("0o") {
        if !oct.is_empty() && oct.bytes().all(|b| (b'0'..=b'7').contains(&b)) {
            return ScalarKind::Int;
        }
    }
    if is_float(unsigned) {
        return ScalarKind::Float;
    }
    ScalarKind::String
}

fn is_float(s: &str) -> bool {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let mut parts = mantissa.splitn(2, '.');
    let int_part = parts.next().unwrap_or("");
    let frac_part = parts.next();
    let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    let mantissa_ok = match frac_part {
        Some(frac) => digits(int_part) && digits(frac) && !(int_part.is_empty() && frac.is_empty()),
        None => false,
    } || (exponent.is_some()
        && !int_part.is_empty()
        && digits(int_part)
        && frac_part.is_none());
    let exponent_ok = match exponent {
        Some(e) => {
            let e = e.strip_prefix(['-', '+']).unwrap_or(e);
            !e.is_empty() && digits(e)
        }
        None => true,
    };
    mantissa_ok && exponent_ok
}

enum Frame {
    Mapping {
        entries: Vec<(String, Node)>,
        seen: HashSet<String>,
        pending_key: Option<String>,
        anchor: usize,
        is_root: bool,
    },
    Sequence {
        items: Vec<Node>,
        anchor: usize,
    },
}

#[derive(Default)]
struct TreeBuilder {
    stack: Vec<Frame>,
    anchors: HashMap<usize, Node>,
    root: Option<Node>,
    documents: usize,
    nodes: usize,
    error: Option<Error>,
}

impl TreeBuilder {
    fn complete(&mut self, node: Node, plain: bool, mark: Marker) {
        if self.error.is_some() {
            return;
        }
        self.nodes += node.size();
        if self.nodes > MAX_NODES {
            self.error = Some(Error::Invalid(format!(
                "document expands to more than {MAX_NODES} nodes"
            )));
            return;
        }
        match self.stack.last_mut() {
            None => {
                if self.root.is_none() {
                    self.root = Some(node);
                }
            }
            Some(Frame::Sequence { items, .. }) => items.push(node),
            Some(Frame::Mapping {
                entries,
                seen,
                pending_key,
                is_root,
                ..
            }) => match pending_key.take() {
                None => {
                    let key = match node {
                        Node::Scalar(s) => {
                            if *is_root && plain && YAML11_TRUE.contains(&s.value.as_str()) {
                                "on".to_string()
                            } else {
                                s.value
                            }
                        }
                        _ => {
                            self.error = Some(Error::Yaml {
                                line: mark.line(),
                                column: mark.col() + 1,
                                message: "complex mapping keys are not supported".into(),
                            });
                            return;
                        }
                    };
                    if !seen.insert(key.clone()) {
                        self.error = Some(Error::DuplicateKey {
                            key,
                            line: mark.line(),
                            column: mark.col() + 1,
                        });
                        return;
                    }
                    *pending_key = Some(key);
                }
                Some(key) => entries.push((key, node)),
            },
        }
    }

    fn remember(&mut self, anchor: usize, node: &Node) {
        if anchor > 0 {
            self.anchors.insert(anchor, node.clone());
        }
    }
}

impl MarkedEventReceiver for TreeBuilder {
    fn on_event(&mut self, event: Event, mark: Marker) {
        if self.error.is_some() {
            return;
        }
        match event {
            Event::DocumentStart => self.documents += 1,
            Event::Scalar(value, style, anchor, tag) => {
                let plain = style == TScalarStyle::Plain;
                let kind = match (&tag, plain) {
                    (Some(Tag { suffix, .. }), _) if suffix == "str" => ScalarKind::String,
                    (_, true) => resolve_plain(&value),
                    _ => ScalarKind::String,
                };
                let value = if plain && kind == ScalarKind::Null && value == "~" {
                    String::new()
                } else {
                    value
                };
                let node = Node::Scalar(Scalar { value, kind });
                self.remember(anchor, &node);
                self.complete(node, plain, mark);
            }
            Event::Alias(anchor) => match self.anchors.get(&anchor).cloned() {
                Some(node) => {
                    let plain = matches!(node, Node::Scalar(_));
                    self.complete(node, plain, mark);
                }
                None => {
                    self.error = Some(Error::Yaml {
                        line: mark.line(),
                        column: mark.col() + 1,
                        message: "unknown anchor".into(),
                    })
                }
            },
            Event::MappingStart(anchor, _) => {
                let is_root = self.stack.is_empty();
                self.stack.push(Frame::Mapping {
                    entries: Vec::new(),
                    seen: HashSet::new(),
                    pending_key: None,
                    anchor,
                    is_root,
                });
            }
            Event::SequenceStart(anchor, _) => self.stack.push(Frame::Sequence {
                items: Vec::new(),
                anchor,
            }),
            Event::MappingEnd | Event::SequenceEnd => {
                let (node, anchor) = match self.stack.pop() {
                    Some(Frame::Mapping {
                        entries, anchor, ..
                    }) => (Node::Mapping(entries), anchor),
                    Some(Frame::Sequence { items, anchor }) => (Node::Sequence(items), anchor),
                    None => return,
                };
                // size was counted as children completed
                self.nodes -= node.size() - 1;
                self.remember(anchor, &node);
                self.complete(node, false, mark);
            }
            _ => {}
        }
    }
}
