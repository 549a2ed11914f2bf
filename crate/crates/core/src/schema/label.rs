use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::LabelSchema;

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("label is for schema {found}, expected {expected}")]
    SchemaMismatch { expected: String, found: String },
    #[error("label has no value for {0:?}")]
    MissingPair(String),
    #[error("label has a value for {0:?}, which the schema does not define")]
    ExtraPair(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Presence {
    Present,
    Absent,
}

impl Presence {
    pub fn is_present(self) -> bool {
        self == Presence::Present
    }
}

impl From<bool> for Presence {
    fn from(present: bool) -> Self {
        if present {
            Presence::Present
        } else {
            Presence::Absent
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Generated,
    Declared,
    GroundTruth,
}

/// One model answer behind a generated value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub segment_ids: Vec<usize>,
    pub answer: String,
    /// Audience or jurisdiction words found in the context, such as "child"
    /// or "California". Advisory only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub group_markers: Vec<String>,
}

/// Values for every (section, attribute) pair of a schema, keyed
/// `"<section>/<attribute>"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyLabel {
    pub schema_ref: String,
    pub origin: Origin,
    pub values: IndexMap<String, Presence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<IndexMap<String, Vec<Evidence>>>,
}

impl PrivacyLabel {
    pub fn key(section: &str, attribute: &str) -> String {
        format!("{section}/{attribute}")
    }

    /// Every pair Absent, in schema order.
    pub fn absent(schema: &LabelSchema, origin: Origin) -> Self {
        Self {
            schema_ref: schema.reference(),
            origin,
            values: schema
                .pairs()
                .map(|(s, a)| (Self::key(&s.name, &a.name), Presence::Absent))
                .collect(),
            provenance: None,
        }
    }

    pub fn get(&self, section: &str, attribute: &str) -> Option<Presence> {
        self.values.get(&Self::key(section, attribute)).copied()
    }

    /// Sets a value; returns false when the pair is not in the label.
    pub fn set(&mut self, section: &str, attribute: &str, value: Presence) -> bool {
        match self.values.get_mut(&Self::key(section, attribute)) {
            Some(v) => {
                *v = value;
                true
            }
            None => false,
        }
    }

    pub fn present_count(&self) -> usize {
        self.values.values().filter(|v| v.is_present()).count()
    }

    /// Checks the schema reference and that the values cover the schema's
    /// pairs exactly, then reorders them into schema order.
    pub fn validate(mut self, schema: &LabelSchema) -> Result<Self, LabelError> {
        let expected = schema.reference();
        if self.schema_ref != expected {
            return Err(LabelError::SchemaMismatch {
                expected,
                found: self.schema_ref,
            });
        }
        let mut ordered = IndexMap::with_capacity(self.values.len());
        for (s, a) in schema.pairs() {
            let key = Self::key(&s.name, &a.name);
            let value = self
                .values
                .swap_remove(&key)
                .ok_or_else(|| LabelError::MissingPair(key.clone()))?;
            ordered.insert(key, value);
        }
        if let Some(extra) = self.values.keys().next() {
            return Err(LabelError::ExtraPair(extra.clone()));
        }
        self.values = ordered;
        Ok(self)
    }

    pub fn from_json(src: &str, schema: &LabelSchema) -> Result<Self, LabelError> {
        serde_json::from_str::<Self>(src)?.validate(schema)
    }

    pub fn load(path: impl AsRef<Path>, schema: &LabelSchema) -> Result<Self, LabelError> {
        Self::from_json(&std::fs::read_to_string(path)?, schema)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("label serializes");
        s.push('\n');
        s
    }
}
