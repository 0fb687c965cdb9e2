//! Size and feature diagnostics weighted by observed reliability effects.
//!
//! The embedded risk model holds per-unit odds ratios (failure) and
//! incidence rate ratios (commits) for the four size metrics, tercile
//! thresholds for each, and presence / per-path ratios per feature. A JSON
//! file may override any part of it; keys it omits keep their defaults and
//! `null` marks an effect as absent.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::Feature;
use crate::error::{Error, Result};
use crate::metrics::{round4, SizeMetric, WorkflowMetrics};

const DEFAULT_MODEL: &str = include_str!("../data/risk_model.json");

/// Appended to every diagnostic message.
pub const CAVEAT: &str = "(association observed across open-source workflows, not a causal effect)";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t1: f64,
    pub t2: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeEffect {
    pub failure_or: Option<f64>,
    pub commits_irr: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureEffect {
    pub presence_or: Option<f64>,
    pub presence_irr: Option<f64>,
    pub path_or: Option<f64>,
    pub path_irr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskModel {
    pub provenance: String,
    pub size_thresholds: BTreeMap<SizeMetric, Thresholds>,
    pub size_effects: BTreeMap<SizeMetric, SizeEffect>,
    #[serde(default)]
    pub feature_effects: BTreeMap<Feature, FeatureEffect>,
}

impl RiskModel {
    pub fn thresholds(&self, metric: SizeMetric) -> Thresholds {
        self.size_thresholds[&metric]
    }

    pub fn size_effect(&self, metric: SizeMetric) -> SizeEffect {
        self.size_effects.get(&metric).copied().unwrap_or_default()
    }

    pub fn feature_effect(&self, feature: Feature) -> FeatureEffect {
        self.feature_effects
            .get(&feature)
            .copied()
            .unwrap_or_default()
    }

    fn validate(self) -> Result<Self> {
        for metric in SizeMetric::ALL {
            let t = self
                .size_thresholds
                .get(&metric)
                .ok_or_else(|| Error::RiskModel(format!("missing thresholds for {metric}")))?;
            if !(t.t1.is_finite() && t.t2.is_finite() && t.t1 < t.t2) {
                return Err(Error::RiskModel(format!(
                    "thresholds for {metric} must satisfy t1 < t2 (got {} and {})",
                    t.t1, t.t2
                )));
            }
        }
        let check = |name: String, v: Option<f64>| match v {
            Some(x) if !(x.is_finite() && x > 0.0) => Err(Error::RiskModel(format!(
                "{name} must be positive, got {x}"
            ))),
            _ => Ok(()),
        };
        for (m, e) in &self.size_effects {
            check(format!("{m}.failure_or"), e.failure_or)?;
            check(format!("{m}.commits_irr"), e.commits_irr)?;
        }
        for (f, e) in &self.feature_effects {
            check(format!("{f}.presence_or"), e.presence_or)?;
            check(format!("{f}.presence_irr"), e.presence_irr)?;
            check(format!("{f}.path_or"), e.path_or)?;
            check(format!("{f}.path_irr"), e.path_irr)?;
        }
        Ok(self)
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn from_value(value: Value) -> Result<RiskModel> {
    let model: RiskModel =
        serde_json::from_value(value).map_err(|e| Error::RiskModel(e.to_string()))?;
    model.validate()
}

/// The embedded model.
pub fn default_risk_model() -> RiskModel {
    from_value(serde_json::from_str(DEFAULT_MODEL).expect("shipped model parses"))
        .expect("shipped model is valid")
}

/// Applies a JSON override on top of the defaults.
pub fn risk_model_with_override(text: &str) -> Result<RiskModel> {
    let mut base: Value = serde_json::from_str(DEFAULT_MODEL).expect("shipped model parses");
    let over: Value = serde_json::from_str(text).map_err(|e| Error::RiskModel(e.to_string()))?;
    if !over.is_object() {
        return Err(Error::RiskModel(
            "model override must be a JSON object".into(),
        ));
    }
    base["provenance"] = json!("custom");
    merge(&mut base, over);
    from_value(base)
}

pub fn load_risk_model(path: Option<&Path>) -> Result<RiskModel> {
    match path {
        None => Ok(default_risk_model()),
        Some(p) => {
            risk_model_with_override(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Info,
    Warn,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub rule_id: String,
    pub severity: Severity,
    pub file: String,
    pub message: String,
    pub evidence: BTreeMap<String, Value>,
}

impl Diagnostic {
    pub fn render(&self) -> String {
        let severity = match self.severity {
            Severity::Info => "info",
            Severity::Warn => "warn",
        };
        format!(
            "{}: {severity} {}: {}",
            self.file, self.rule_id, self.message
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskSummary {
    pub relative_failure_odds: f64,
    pub relative_commit_rate: f64,
    pub caveat: &'static str,
}

fn num(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        json!(x as i64)
    } else {
        json!(x)
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn size_rule(metric: SizeMetric) -> (usize, &'static str, &'static str) {
    match metric {
        SizeMetric::NPaths => (1, "#Paths", "path"),
        SizeMetric::NConstructs => (2, "#Constructs", "construct"),
        SizeMetric::NFeatures => (3, "#Features", "feature"),
        SizeMetric::PathConstructRatio => (4, "path-to-construct ratio", "ratio_unit"),
    }
}

fn feature_rule(feature: Feature) -> String {
    let index = Feature::ALL
        .iter()
        .position(|f| *f == feature)
        .expect("known feature");
    format!("F{:03}", index + 1)
}

fn metric_value(metrics: &WorkflowMetrics, metric: SizeMetric) -> Value {
    match metric {
        SizeMetric::NPaths => json!(metrics.n_paths),
        SizeMetric::NConstructs => json!(metrics.n_constructs),
        SizeMetric::NFeatures => json!(metrics.n_features),
        SizeMetric::PathConstructRatio => json!(round4(metrics.path_construct_ratio)),
    }
}

fn describe(ratio: f64, what: &str) -> String {
    if ratio >= 1.0 {
        format!("{:.0}% higher {what}", (ratio - 1.0) * 100.0)
    } else {
        format!("{:.0}% lower {what}", (1.0 - ratio) * 100.0)
    }
}

/// Diagnostics for one workflow, ordered by rule id, and its risk summary.
pub fn evaluate(
    file: &str,
    metrics: &WorkflowMetrics,
    model: &RiskModel,
) -> (Vec<Diagnostic>, RiskSummary) {
    let mut out = Vec::new();
    for metric in SizeMetric::ALL {
        let value = metric.value(metrics);
        let Thresholds { t1, t2 } = model.thresholds(metric);
        let effect = model.size_effect(metric);
        let (index, label, unit) = size_rule(metric);
        let (rule_id, severity, threshold, size) = if value > t2 {
            (format!("W{index:03}"), Severity::Warn, t2, "large")
        } else if value > t1 {
            (format!("I{index:03}"), Severity::Info, t1, "medium")
        } else {
            continue;
        };
        let mut evidence = BTreeMap::from([
            ("value".to_string(), metric_value(metrics, metric)),
            ("threshold".to_string(), num(threshold)),
            (format!("or_per_{unit}"), opt(effect.failure_or)),
            (format!("irr_per_{unit}"), opt(effect.commits_irr)),
        ]);
        evidence.insert("metric".into(), json!(metric.as_str()));
        let mut message = format!(
            "workflow is {size} by {label} ({} > {})",
            metric_value(metrics, metric),
            num(threshold)
        );
        if let Some(or) = effect.failure_or {
            message.push_str(&format!(
                "; each additional {unit} is associated with failure odds x{or}"
            ));
        }
        if let Some(irr) = effect.commits_irr {
            message.push_str(&format!(" and commit rate x{irr}"));
        }
        message.push(' ');
        message.push_str(CAVEAT);
        out.push(Diagnostic {
            rule_id,
            severity,
            file: file.to_string(),
            message,
            evidence,
        });
    }

    let mut odds = 1.0;
    let mut rate = 1.0;
    for feature in metrics.features_present() {
        let effect = model.feature_effect(feature);
        odds *= effect.presence_or.unwrap_or(1.0);
        rate *= effect.presence_irr.unwrap_or(1.0);
        let Some(or) = effect.presence_or else {
            continue;
        };
        let irr_increases = effect.presence_irr.is_some_and(|irr| irr > 1.0);
        let severity = if or > 1.0 {
            Severity::Warn
        } else if irr_increases {
            Severity::Info
        } else {
            continue;
        };
        let mut message = format!(
            "uses {feature}: {} (OR {or})",
            describe(or, "odds of failure")
        );
        if let Some(irr) = effect.presence_irr {
            message.push_str(&format!(", {} (IRR {irr})", describe(irr, "commit rate")));
        }
        message.push(' ');
        message.push_str(CAVEAT);
        let evidence = BTreeMap::from([
            ("feature".to_string(), json!(feature.as_str())),
            ("n_paths".to_string(), json!(metrics.usage(feature).n_paths)),
            ("presence_or".to_string(), opt(effect.presence_or)),
            ("presence_irr".to_string(), opt(effect.presence_irr)),
            ("path_or".to_string(), opt(effect.path_or)),
            ("path_irr".to_string(), opt(effect.path_irr)),
        ]);
        out.push(Diagnostic {
            rule_id: feature_rule(feature),
            severity,
            file: file.to_string(),
            message,
            evidence,
        });
    }
    out.sort_by(|a, b| a.rule_id.cmp(&b.rule_id).then(a.file.cmp(&b.file)));
    let summary = RiskSummary {
        relative_failure_odds: odds,
        relative_commit_rate: rate,
        caveat: CAVEAT,
    };
    (out, summary)
}
