//! Platform label formats and label instances.
//!
//! A [`LabelSchema`] lists the sections of a platform's privacy label, the
//! attributes each section asks about, and which data-practice categories
//! feed each section. Schemas are JSON data files so new platforms need no
//! code change; two are bundled.

mod label;
mod template;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::category::DataPracticeCategory;
use crate::document::Segment;

pub use label::{Evidence, LabelError, Origin, Presence, PrivacyLabel};
pub use template::{render_question, TemplateError};

const GOOGLE_SCHEMA: &str = include_str!("../../schemas/google-data-safety.json");
const APPLE_SCHEMA: &str = include_str!("../../schemas/apple-app-privacy.json");

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("invalid schema: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueDomain {
    /// One of the platform's data types: collected/shared or not.
    Presence,
    /// A general practice answered yes or no.
    YesNo,
}

/// True iff `name` or `description` contains the word "other" or "others".
pub fn default_omnibus(name: &str, description: &str) -> bool {
    [name, description].iter().any(|s| {
        s.split(|c: char| !c.is_alphanumeric())
            .any(|w| w.eq_ignore_ascii_case("other") || w.eq_ignore_ascii_case("others"))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub description: String,
    pub value_domain: ValueDomain,
    omnibus: bool,
}

#[derive(Serialize, Deserialize)]
struct AttributeRepr {
    name: String,
    description: String,
    value_domain: ValueDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omnibus: Option<bool>,
}

impl Attribute {
    pub fn new(name: impl Into<String>, description: impl Into<String>, value_domain: ValueDomain) -> Self {
        let (name, description) = (name.into(), description.into());
        let omnibus = default_omnibus(&name, &description);
        Self {
            name,
            description,
            value_domain,
            omnibus,
        }
    }

    pub fn with_omnibus(mut self, omnibus: bool) -> Self {
        self.omnibus = omnibus;
        self
    }

    /// Whether this is a catch-all type whose scope is open-ended.
    pub fn is_omnibus(&self) -> bool {
        self.omnibus
    }
}

// Only overrides of the computed omnibus default are written out, so a
// canonical file round-trips byte for byte.
impl Serialize for Attribute {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let default = default_omnibus(&self.name, &self.description);
        AttributeRepr {
            name: self.name.clone(),
            description: self.description.clone(),
            value_domain: self.value_domain,
            omnibus: (self.omnibus != default).then_some(self.omnibus),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Attribute {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = AttributeRepr::deserialize(d)?;
        let omnibus = r
            .omnibus
            .unwrap_or_else(|| default_omnibus(&r.name, &r.description));
        Ok(Self {
            name: r.name,
            description: r.description,
            value_domain: r.value_domain,
            omnibus,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub mapped_categories: Vec<DataPracticeCategory>,
    pub question_template: String,
    pub attributes: Vec<Attribute>,
}

impl Section {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn maps_to(&self, category: DataPracticeCategory) -> bool {
        self.mapped_categories.contains(&category)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub platform_id: String,
    pub version: String,
    pub sections: Vec<Section>,
}

impl LabelSchema {
    pub fn from_json(src: &str) -> Result<Self, SchemaError> {
        let schema: Self =
            serde_json::from_str(src).map_err(|e| SchemaError::Invalid(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SchemaError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Google Play's Data Safety format.
    pub fn google() -> Self {
        Self::from_json(GOOGLE_SCHEMA).expect("bundled Google schema is valid")
    }

    /// Apple's App Privacy Details format.
    pub fn apple() -> Self {
        Self::from_json(APPLE_SCHEMA).expect("bundled Apple schema is valid")
    }

    /// Pretty JSON with a trailing newline; the form the bundled files use.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schema serializes");
        s.push('\n');
        s
    }

    /// `platform_id@version`, the value labels carry in `schema_ref`.
    pub fn reference(&self) -> String {
        format!("{}@{}", self.platform_id, self.version)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Every (section, attribute) pair in schema order.
    pub fn pairs(&self) -> impl Iterator<Item = (&Section, &Attribute)> {
        self.sections
            .iter()
            .flat_map(|s| s.attributes.iter().map(move |a| (s, a)))
    }

    pub fn pair_count(&self) -> usize {
        self.sections.iter().map(|s| s.attributes.len()).sum()
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let invalid = |m: String| Err(SchemaError::Invalid(m));
        if self.platform_id.is_empty() {
            return invalid("empty platform_id".into());
        }
        if self.sections.is_empty() {
            return invalid("schema has no sections".into());
        }
        let mut section_names = HashSet::new();
        for section in &self.sections {
            if section.name.is_empty() || section.name.contains('/') {
                return invalid(format!("bad section name {:?}", section.name));
            }
            if !section_names.insert(section.name.as_str()) {
                return invalid(format!("duplicate section {:?}", section.name));
            }
            if section.mapped_categories.is_empty() {
                return invalid(format!("section {:?} maps to no category", section.name));
            }
            let unique: HashSet<_> = section.mapped_categories.iter().collect();
            if unique.len() != section.mapped_categories.len() {
                return invalid(format!("section {:?} repeats a category", section.name));
            }
            if let Err(e) = template::check(&section.question_template) {
                return invalid(format!("section {:?}: {e}", section.name));
            }
            if section.attributes.is_empty() {
                return invalid(format!("section {:?} has no attributes", section.name));
            }
            let mut names = HashSet::new();
            for attr in &section.attributes {
                if attr.name.is_empty() || attr.description.trim().is_empty() {
                    return invalid(format!(
                        "attribute {:?} in {:?} needs a name and description",
                        attr.name, section.name
                    ));
                }
                if !names.insert(attr.name.as_str()) {
                    return invalid(format!(
                        "duplicate attribute {:?} in section {:?}",
                        attr.name, section.name
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Segments whose categories intersect the section's mapping, in input order.
pub fn select_segments<'a>(section: &Section, segments: &'a [Segment]) -> Vec<&'a Segment> {
    segments
        .iter()
        .filter(|s| s.categories.iter().any(|c| section.maps_to(*c)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use DataPracticeCategory as C;

    #[test]
    fn google_layout() {
        let g = LabelSchema::google();
        assert_eq!(g.sections.len(), 3);
        assert_eq!(g.sections[0].attributes.len(), 38);
        assert_eq!(g.sections[1].attributes.len(), 38);
        let security = &g.sections[2];
        let names: Vec<_> = security.attributes.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["Encryption", "RTBF"]);
        assert!(security.attributes.iter().all(|a| a.value_domain == ValueDomain::YesNo));
        assert_eq!(security.attributes[0].description, "Data is encrypted in transit");
        assert_eq!(security.attributes[1].description, "You can request that data be deleted");
        assert_eq!(g.pair_count(), 78);
    }

    #[test]
    fn google_has_seven_omnibus_types_per_data_section() {
        let g = LabelSchema::google();
        let count = |i: usize| g.sections[i].attributes.iter().filter(|a| a.is_omnibus()).count();
        assert_eq!((count(0), count(1), count(2)), (7, 7, 0));
        assert_eq!(g.pairs().filter(|(_, a)| a.is_omnibus()).count(), 14);
    }

    #[test]
    fn apple_layout() {
        let a = LabelSchema::apple();
        assert_eq!(a.sections.len(), 3);
        assert!(a.sections.iter().all(|s| s.attributes.len() == 13));
        assert!(a
            .pairs()
            .all(|(_, attr)| attr.value_domain == ValueDomain::Presence));
    }

    #[test]
    fn bundled_files_are_canonical() {
        assert_eq!(LabelSchema::google().to_canonical_json(), GOOGLE_SCHEMA);
        assert_eq!(LabelSchema::apple().to_canonical_json(), APPLE_SCHEMA);
    }

    #[test]
    fn omnibus_detection() {
        let other_info = Attribute::new(
            "Other Info",
            "Any other personal information, such as date of birth",
            ValueDomain::Presence,
        );
        let messages = Attribute::new(
            "Other In-app Messages",
            "Any other types of messages. For example, instant messages or chat content.",
            ValueDomain::Presence,
        );
        let email = Attribute::new("Email Address", "A user's email address", ValueDomain::Presence);
        assert!(other_info.is_omnibus());
        assert!(messages.is_omnibus());
        assert!(!email.is_omnibus());
        assert!(!Attribute::new("Mother", "another", ValueDomain::Presence).is_omnibus());
        assert!(!other_info.with_omnibus(false).is_omnibus());
    }

    fn schema_with(attrs: &str, categories: &str) -> Result<LabelSchema, SchemaError> {
        LabelSchema::from_json(&format!(
            r#"{{"platform_id": "p", "version": "1", "sections": [{{"name": "S", "mapped_categories": {categories},
            "question_template": "Does it collect {{attribute_name}}?", "attributes": {attrs}}}]}}"#
        ))
    }

    #[test]
    fn invalid_schemas() {
        let email = r#"{"name": "Email Address", "description": "d", "value_domain": "Presence"}"#;
        let ok = schema_with(&format!("[{email}]"), r#"["Data Security"]"#);
        assert!(ok.is_ok());
        for (attrs, cats) in [
            (format!("[{email}, {email}]"), r#"["Data Security"]"#),
            (format!("[{email}]"), "[]"),
            (format!("[{email}]"), r#"["Security"]"#),
            (format!("[{email}]"), r#"["Data Security", "Data Security"]"#),
            (r#"[{"name": "x", "description": " ", "value_domain": "Presence"}]"#.into(), r#"["Data Security"]"#),
            (r#"[{"name": "x", "description": "d", "value_domain": "Maybe"}]"#.into(), r#"["Data Security"]"#),
        ] {
            assert!(matches!(schema_with(&attrs, cats), Err(SchemaError::Invalid(_))), "{attrs} {cats}");
        }
        assert!(matches!(LabelSchema::from_json("{"), Err(SchemaError::Invalid(_))));
        let bad_template = ok.unwrap().to_canonical_json().replace("{attribute_name}", "{attr}");
        assert!(LabelSchema::from_json(&bad_template).is_err());
    }

    fn seg(id: usize, cats: &[C]) -> Segment {
        Segment {
            segment_id: id,
            sentence_indices: id..id + 1,
            text: format!("s{id}"),
            embedding: None,
            categories: cats.iter().copied().collect::<BTreeSet<_>>(),
        }
    }

    #[test]
    fn selection_by_mapping() {
        let g = LabelSchema::google();
        let segs = [seg(0, &[C::FirstPartyCollection]), seg(1, &[C::ThirdPartySharing])];
        let first = select_segments(&g.sections[0], &segs);
        assert_eq!(first.iter().map(|s| s.segment_id).collect::<Vec<_>>(), [0]);

        let security = &g.sections[2];
        let retention = [seg(0, &[C::DataRetention])];
        assert_eq!(select_segments(security, &retention).len(), 1);

        let none = [seg(0, &[C::DoNotTrack]), seg(1, &[])];
        assert!(select_segments(security, &none).is_empty());
    }
}
