use std::collections::BTreeMap;
use std::path::Path;

use super::{CategoryScores, ClassifyError};
use crate::category::DataPracticeCategory;

/// Scores produced by some other model, keyed by segment id.
///
/// Sidecar format: `{"<segment_id>": {"<category name>": probability}}`.
/// Categories absent from an entry score 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalScores {
    by_segment: BTreeMap<usize, CategoryScores>,
}

impl ExternalScores {
    pub fn from_json(src: &str) -> Result<Self, ClassifyError> {
        let raw: BTreeMap<String, BTreeMap<DataPracticeCategory, f64>> = serde_json::from_str(src)?;
        let mut by_segment = BTreeMap::new();
        for (key, scores) in raw {
            let id: usize = key
                .parse()
                .map_err(|_| ClassifyError::InvalidModel(format!("segment id {key:?}")))?;
            by_segment.insert(id, CategoryScores::new(scores)?);
        }
        Ok(Self { by_segment })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn scores(&self, segment_id: usize) -> Result<CategoryScores, ClassifyError> {
        self.by_segment
            .get(&segment_id)
            .cloned()
            .ok_or(ClassifyError::MissingExternalScores(segment_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sidecar() {
        let ext = ExternalScores::from_json(r#"{"3": {"Data Security": 0.8}}"#).unwrap();
        assert_eq!(ext.scores(3).unwrap().get(DataPracticeCategory::DataSecurity), 0.8);
        assert!(matches!(ext.scores(4), Err(ClassifyError::MissingExternalScores(4))));
    }

    #[test]
    fn rejects_bad_sidecars() {
        assert!(ExternalScores::from_json(r#"{"x": {}}"#).is_err());
        assert!(ExternalScores::from_json(r#"{"1": {"Data Security": 2.0}}"#).is_err());
        assert!(ExternalScores::from_json(r#"{"1": {"Nope": 0.2}}"#).is_err());
    }
}
