use std::collections::BTreeMap;
use std::path::Path;

use super::{CategoryScores, ClassifyError};
use crate::category::DataPracticeCategory;

const DEFAULT_RULES: &str = include_str!("../../data/keyword_rules.json");

/// Indicator phrases per category. A category scores 1.0 when any of its
/// phrases occurs in the lowercased segment text, otherwise 0.0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordRules {
    phrases: BTreeMap<DataPracticeCategory, Vec<String>>,
}

impl KeywordRules {
    pub fn from_json(src: &str) -> Result<Self, ClassifyError> {
        let raw: BTreeMap<DataPracticeCategory, Vec<String>> = serde_json::from_str(src)?;
        let phrases = raw
            .into_iter()
            .map(|(c, ps)| (c, ps.into_iter().map(|p| p.to_lowercase()).collect()))
            .collect();
        Ok(Self { phrases })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn phrases(&self, category: DataPracticeCategory) -> &[String] {
        self.phrases.get(&category).map_or(&[], Vec::as_slice)
    }

    pub fn scores(&self, text: &str) -> CategoryScores {
        let lower = text.to_lowercase();
        let hits = DataPracticeCategory::ALL
            .into_iter()
            .map(|c| {
                let hit = self.phrases(c).iter().any(|p| lower.contains(p.as_str()));
                (c, if hit { 1.0 } else { 0.0 })
            })
            .collect();
        CategoryScores::new(hits).expect("keyword scores are 0 or 1")
    }
}

impl Default for KeywordRules {
    fn default() -> Self {
        Self::from_json(DEFAULT_RULES).expect("bundled keyword rules are valid")
    }
}
