//! Scoring generated labels against ground truth, and finding practices a
//! declared label leaves out.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::generate::CostStats;
use crate::schema::{Evidence, LabelError, LabelSchema, PrivacyLabel, Section, ValueDomain};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    SchemaMismatch(#[from] LabelError),
    #[error("section {0:?} has no attribute with any positive instance")]
    EmptySection(String),
    #[error("unknown section {0:?}")]
    UnknownSection(String),
}

/// Agreement tallies for one attribute over a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeCounts {
    pub section: String,
    pub attribute: String,
    pub value_domain: ValueDomain,
    pub omnibus: bool,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl AttributeCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub corpus_size: u64,
    /// In schema order.
    pub attributes: Vec<AttributeCounts>,
}

impl ConfusionCounts {
    pub fn get(&self, section: &str, attribute: &str) -> Option<&AttributeCounts> {
        self.attributes
            .iter()
            .find(|a| a.section == section && a.attribute == attribute)
    }
}

/// Tallies (generated, truth) label pairs per attribute. Omnibus attributes
/// are left out entirely when `exclude_omnibus` is set.
pub fn compare_labels(
    pairs: &[(PrivacyLabel, PrivacyLabel)],
    schema: &LabelSchema,
    exclude_omnibus: bool,
) -> Result<ConfusionCounts, EvalError> {
    let pairs = pairs
        .iter()
        .map(|(g, t)| Ok((g.clone().validate(schema)?, t.clone().validate(schema)?)))
        .collect::<Result<Vec<_>, LabelError>>()?;
    let mut attributes = Vec::new();
    for (section, attr) in schema.pairs() {
        if exclude_omnibus && attr.is_omnibus() {
            continue;
        }
        let key = PrivacyLabel::key(&section.name, &attr.name);
        let mut c = AttributeCounts {
            section: section.name.clone(),
            attribute: attr.name.clone(),
            value_domain: attr.value_domain,
            omnibus: attr.is_omnibus(),
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: 0,
        };
        for (generated, truth) in &pairs {
            match (generated.values[&key].is_present(), truth.values[&key].is_present()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        attributes.push(c);
    }
    Ok(ConfusionCounts {
        corpus_size: pairs.len() as u64,
        attributes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeMetrics {
    pub attribute: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Only for yes/no attributes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    /// False when the attribute never occurs in truth or prediction; such
    /// attributes stay out of the section means.
    pub included: bool,
}

/// Unweighted means over a section's included attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionMetrics {
    pub section: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean accuracy over the section's yes/no attributes, if it has any.
    pub accuracy: Option<f64>,
    pub corpus_size: u64,
    pub attributes: Vec<AttributeMetrics>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn attribute_metrics(c: &AttributeCounts) -> AttributeMetrics {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    AttributeMetrics {
        attribute: c.attribute.clone(),
        precision,
        recall,
        f1,
        accuracy: (c.value_domain == ValueDomain::YesNo).then(|| ratio(c.tp + c.tn, c.total())),
        included: c.tp + c.fp + c.fn_ > 0,
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Macro precision, recall and F1 over the section's attributes present in
/// `counts`.
pub fn macro_metrics(counts: &ConfusionCounts, section: &Section) -> Result<SectionMetrics, EvalError> {
    let attributes: Vec<_> = counts
        .attributes
        .iter()
        .filter(|c| c.section == section.name)
        .map(attribute_metrics)
        .collect();
    let included: Vec<_> = attributes.iter().filter(|a| a.included).collect();
    if included.is_empty() {
        return Err(EvalError::EmptySection(section.name.clone()));
    }
    let m = |f: fn(&AttributeMetrics) -> f64| mean(included.iter().map(|a| f(a))).expect("non-empty");
    Ok(SectionMetrics {
        section: section.name.clone(),
        precision: m(|a| a.precision),
        recall: m(|a| a.recall),
        f1: m(|a| a.f1),
        accuracy: mean(attributes.iter().filter_map(|a| a.accuracy)),
        corpus_size: counts.corpus_size,
        attributes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnderclaimFinding {
    pub app_id: String,
    pub section: String,
    pub attribute: String,
    /// Whether the generated label marks the practice Present.
    pub detected: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<Evidence>,
}

/// Practices the truth label has and the declared label lacks.
pub fn detect_underclaims(
    app_id: &str,
    truth: &PrivacyLabel,
    declared: &PrivacyLabel,
    generated: &PrivacyLabel,
    schema: &LabelSchema,
    exclude_omnibus: bool,
) -> Result<Vec<UnderclaimFinding>, EvalError> {
    let truth = truth.clone().validate(schema)?;
    let declared = declared.clone().validate(schema)?;
    let generated = generated.clone().validate(schema)?;
    let mut findings = Vec::new();
    for (section, attr) in schema.pairs() {
        if exclude_omnibus && attr.is_omnibus() {
            continue;
        }
        let key = PrivacyLabel::key(&section.name, &attr.name);
        if truth.values[&key].is_present() && !declared.values[&key].is_present() {
            findings.push(UnderclaimFinding {
                app_id: app_id.to_string(),
                section: section.name.clone(),
                attribute: attr.name.clone(),
                detected: generated.values[&key].is_present(),
                provenance: generated
                    .provenance
                    .as_ref()
                    .and_then(|p| p.get(&key).cloned())
                    .unwrap_or_default(),
            });
        }
    }
    Ok(findings)
}

/// Share of findings the generated labels caught; `None` without findings.
pub fn detection_rate(findings: &[UnderclaimFinding]) -> Option<f64> {
    if findings.is_empty() {
        return None;
    }
    let detected = findings.iter().filter(|f| f.detected).count();
    Some(detected as f64 / findings.len() as f64)
}

/// Metrics for one section, or why there are none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionReport {
    pub section: String,
    pub metrics: Option<SectionMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub corpus_size: u64,
    pub sections: Vec<SectionReport>,
    pub sections_without_omnibus: Vec<SectionReport>,
    pub findings: Vec<UnderclaimFinding>,
    pub detection_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostStats>,
}

fn section_reports(counts: &ConfusionCounts, schema: &LabelSchema) -> Vec<SectionReport> {
    schema
        .sections
        .iter()
        .map(|s| SectionReport {
            section: s.name.clone(),
            metrics: macro_metrics(counts, s).ok(),
        })
        .collect()
}

impl EvalReport {
    /// Scores aligned (generated, truth) pairs with and without omnibus
    /// attributes. Findings and cost are filled in by the caller.
    pub fn build(pairs: &[(PrivacyLabel, PrivacyLabel)], schema: &LabelSchema) -> Result<Self, EvalError> {
        let all = compare_labels(pairs, schema, false)?;
        let without = compare_labels(pairs, schema, true)?;
        Ok(Self {
            corpus_size: all.corpus_size,
            sections: section_reports(&all, schema),
            sections_without_omnibus: section_reports(&without, schema),
            findings: Vec::new(),
            detection_rate: None,
            cost: None,
        })
    }

    pub fn with_findings(mut self, findings: Vec<UnderclaimFinding>) -> Self {
        self.detection_rate = detection_rate(&findings);
        self.findings = findings;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fixed-width table: section, precision, recall, F1, accuracy.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        for (title, rows) in [
            ("all attributes", &self.sections),
            ("without omnibus attributes", &self.sections_without_omnibus),
        ] {
            let _ = writeln!(out, "{title} (n = {})", self.corpus_size);
            let _ = writeln!(out, "{:<32} {:>9} {:>9} {:>9} {:>9}", "section", "precision", "recall", "F1", "accuracy");
            for r in rows {
                let m = r.metrics.as_ref();
                let _ = writeln!(
                    out,
                    "{:<32} {:>9} {:>9} {:>9} {:>9}",
                    r.section,
                    fmt(m.map(|m| m.precision)),
                    fmt(m.map(|m| m.recall)),
                    fmt(m.map(|m| m.f1)),
                    fmt(m.and_then(|m| m.accuracy)),
                );
            }
            out.push('\n');
        }
        let detected = self.findings.iter().filter(|f| f.detected).count();
        let _ = writeln!(
            out,
            "under-claims: {} found, {} detected, detection rate {}",
            self.findings.len(),
            detected,
            fmt(self.detection_rate)
        );
        out
    }
}
