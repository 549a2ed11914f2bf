//! Multi-label assignment of data-practice categories to segments.
//!
//! A [`ClassifierModel`] pairs an inclusion threshold with one of three
//! scoring backends: a linear one-vs-rest model over segment embeddings, a
//! deterministic phrase table, or scores computed elsewhere and read from a
//! sidecar file.

mod external;
mod keyword;
mod linear;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::category::DataPracticeCategory;
use crate::document::Segment;

pub use external::ExternalScores;
pub use keyword::KeywordRules;
pub use linear::{train, Hyperparameters, LinearWeights, TrainingExample};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("no training examples")]
    InsufficientData,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("segment {0} has no embedding")]
    MissingEmbedding(usize),
    #[error("no external scores for segment {0}")]
    MissingExternalScores(usize),
    #[error("threshold {0} must lie strictly between 0 and 1")]
    InvalidThreshold(f64),
    #[error("invalid probability {value} for {category}")]
    InvalidProbability { category: String, value: f64 },
    #[error("invalid model file: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A probability for every one of the twelve categories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<DataPracticeCategory, f64>")]
pub struct CategoryScores(BTreeMap<DataPracticeCategory, f64>);

impl CategoryScores {
    /// Missing categories score 0.
    pub fn new(partial: BTreeMap<DataPracticeCategory, f64>) -> Result<Self, ClassifyError> {
        let mut scores = BTreeMap::new();
        for c in DataPracticeCategory::ALL {
            let value = partial.get(&c).copied().unwrap_or(0.0);
            if !(0.0..=1.0).contains(&value) {
                return Err(ClassifyError::InvalidProbability {
                    category: c.name().to_string(),
                    value,
                });
            }
            scores.insert(c, value);
        }
        Ok(Self(scores))
    }

    pub fn get(&self, category: DataPracticeCategory) -> f64 {
        self.0[&category]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DataPracticeCategory, f64)> + '_ {
        self.0.iter().map(|(c, s)| (*c, *s))
    }

    /// Categories scoring strictly above `threshold`.
    pub fn above(&self, threshold: f64) -> BTreeSet<DataPracticeCategory> {
        self.iter()
            .filter(|(_, s)| *s > threshold)
            .map(|(c, _)| c)
            .collect()
    }
}

impl TryFrom<BTreeMap<DataPracticeCategory, f64>> for CategoryScores {
    type Error = ClassifyError;

    fn try_from(m: BTreeMap<DataPracticeCategory, f64>) -> Result<Self, Self::Error> {
        Self::new(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendKind {
    Linear,
    Keyword,
    External,
}

#[derive(Debug, Clone)]
pub enum Backend {
    Linear(LinearWeights),
    Keyword(KeywordRules),
    External(ExternalScores),
}

#[derive(Debug, Clone)]
pub struct ClassifierModel {
    threshold: f64,
    backend: Backend,
}

impl ClassifierModel {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;

    pub fn new(backend: Backend, threshold: f64) -> Result<Self, ClassifyError> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(ClassifyError::InvalidThreshold(threshold));
        }
        Ok(Self { threshold, backend })
    }

    /// The bundled phrase table at the default threshold.
    pub fn keyword() -> Self {
        Self {
            threshold: Self::DEFAULT_THRESHOLD,
            backend: Backend::Keyword(KeywordRules::default()),
        }
    }

    /// Loads a persisted linear model, keeping its stored threshold.
    pub fn load_linear(path: impl AsRef<Path>) -> Result<Self, ClassifyError> {
        let (weights, threshold) = LinearWeights::load(path)?;
        Self::new(Backend::Linear(weights), threshold)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(self, threshold: f64) -> Result<Self, ClassifyError> {
        Self::new(self.backend, threshold)
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn backend_kind(&self) -> BackendKind {
        match self.backend {
            Backend::Linear(_) => BackendKind::Linear,
            Backend::Keyword(_) => BackendKind::Keyword,
            Backend::External(_) => BackendKind::External,
        }
    }

    pub fn scores(&self, segment: &Segment) -> Result<CategoryScores, ClassifyError> {
        match &self.backend {
            Backend::Linear(w) => {
                let embedding = segment
                    .embedding
                    .as_ref()
                    .ok_or(ClassifyError::MissingEmbedding(segment.segment_id))?;
                w.scores(embedding)
            }
            Backend::Keyword(rules) => Ok(rules.scores(&segment.text)),
            Backend::External(ext) => ext.scores(segment.segment_id),
        }
    }
}

/// Scores a segment, stores the categories above threshold on it and returns
/// both.
pub fn classify(
    model: &ClassifierModel,
    segment: &mut Segment,
) -> Result<(CategoryScores, BTreeSet<DataPracticeCategory>), ClassifyError> {
    let scores = model.scores(segment)?;
    let chosen = scores.above(model.threshold);
    segment.categories = chosen.clone();
    Ok((scores, chosen))
}

pub fn classify_all(model: &ClassifierModel, segments: &mut [Segment]) -> Result<(), ClassifyError> {
    for segment in segments {
        classify(model, segment)?;
    }
    Ok(())
}
