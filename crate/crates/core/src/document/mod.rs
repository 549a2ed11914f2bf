//! Turning a raw policy source into ordered 1-4 sentence segments.

mod clean;
mod fetch;
mod language;
mod quality;
mod segment;
mod sentences;

use std::collections::BTreeSet;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::category::DataPracticeCategory;
use crate::embeddings::{EmbeddingError, SentenceEmbedder, Vector};

pub use clean::clean_html;
pub use fetch::fetch_policy;
pub use language::{filter_language, DEFAULT_MIN_BLOCK_CONFIDENCE, SHORT_BLOCK_WORDS};
pub use quality::{quality_check, QualityVerdict, RejectReason, MIN_BYTES, MIN_WORDS};
pub use segment::{segment, SegmenterConfig, MAX_SENTENCES_PER_SEGMENT};
pub use sentences::{split_sentences, split_text, AbbreviationTable};

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("invalid policy URL {0:?}")]
    InvalidUrl(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("HTTP status {0}")]
    Http(u16),
    #[error("document contains no text")]
    EmptyDocument,
    #[error("no text in the primary language {0:?} remains")]
    NonPrimaryLanguageDocument(String),
    #[error("unsupported language code {0:?}")]
    UnsupportedLanguage(String),
    #[error("quality gate rejected the document: {0}")]
    Rejected(RejectReason),
    #[error("similarity threshold {0} outside [-1, 1]")]
    InvalidThreshold(f64),
    #[error("embedding unavailable: {0}")]
    EmbeddingUnavailable(#[source] EmbeddingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MediaKind {
    Html,
    PlainText,
}

/// Policy bytes as obtained from a file or URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub source_id: String,
    content: Vec<u8>,
    pub media_kind: MediaKind,
    pub fetched_from: Option<String>,
}

impl RawDocument {
    pub fn new(
        source_id: impl Into<String>,
        content: impl Into<Vec<u8>>,
        media_kind: MediaKind,
    ) -> Result<Self, DocumentError> {
        let content = content.into();
        if content.is_empty() {
            return Err(DocumentError::EmptyDocument);
        }
        Ok(Self {
            source_id: source_id.into(),
            content,
            media_kind,
            fetched_from: None,
        })
    }

    pub fn html(source_id: impl Into<String>, html: &str) -> Result<Self, DocumentError> {
        Self::new(source_id, html.as_bytes(), MediaKind::Html)
    }

    pub fn plain_text(source_id: impl Into<String>, text: &str) -> Result<Self, DocumentError> {
        Self::new(source_id, text.as_bytes(), MediaKind::PlainText)
    }

    /// Reads a local file; `.html`, `.htm` and `.xhtml` are treated as HTML,
    /// anything else as plain text. The file stem becomes the source id.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        let path = path.as_ref();
        let content = std::fs::read(path)?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let kind = match ext.as_deref() {
            Some("html" | "htm" | "xhtml") => MediaKind::Html,
            _ => MediaKind::PlainText,
        };
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("policy")
            .to_string();
        Self::new(id, content, kind)
    }

    pub fn content(&self) -> &[u8] {
        &self.content
    }

    pub fn text_lossy(&self) -> String {
        String::from_utf8_lossy(&self.content).into_owned()
    }
}

/// Markup-free policy text as ordered paragraph-level blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanText {
    pub source_id: String,
    blocks: Vec<String>,
    word_count: usize,
    byte_size: usize,
}

impl CleanText {
    pub const BLOCK_SEPARATOR: &'static str = "\n\n";

    pub fn new(source_id: impl Into<String>, blocks: Vec<String>) -> Self {
        let word_count = blocks.iter().map(|b| b.split_whitespace().count()).sum();
        let byte_size = blocks.iter().map(String::len).sum::<usize>()
            + Self::BLOCK_SEPARATOR.len() * blocks.len().saturating_sub(1);
        Self {
            source_id: source_id.into(),
            blocks,
            word_count,
            byte_size,
        }
    }

    pub fn blocks(&self) -> &[String] {
        &self.blocks
    }

    pub fn word_count(&self) -> usize {
        self.word_count
    }

    /// Size in bytes of [`Self::to_plain_text`].
    pub fn byte_size(&self) -> usize {
        self.byte_size
    }

    /// Blocks joined by blank lines; feeding this back through the plain-text
    /// path reproduces the same blocks.
    pub fn to_plain_text(&self) -> String {
        self.blocks.join(Self::BLOCK_SEPARATOR)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

/// A run of 1-4 consecutive sentences treated as one unit downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub segment_id: usize,
    pub sentence_indices: Range<usize>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vector>,
    #[serde(default)]
    pub categories: BTreeSet<DataPracticeCategory>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.sentence_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentence_indices.is_empty()
    }
}

/// Output of document processing: every sentence, and the segments over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedPolicy {
    pub source_id: String,
    pub word_count: usize,
    pub byte_size: usize,
    pub sentences: Vec<Sentence>,
    pub segments: Vec<Segment>,
}

/// Settings for the clean -> language filter -> quality gate -> split ->
/// segment chain.
#[derive(Debug, Clone)]
pub struct DocumentPipeline {
    pub primary_language: String,
    pub min_block_confidence: f64,
    pub apply_quality_gate: bool,
    pub abbreviations: AbbreviationTable,
    pub segmenter: SegmenterConfig,
}

impl Default for DocumentPipeline {
    fn default() -> Self {
        Self {
            primary_language: "en".to_string(),
            min_block_confidence: DEFAULT_MIN_BLOCK_CONFIDENCE,
            apply_quality_gate: true,
            abbreviations: AbbreviationTable::default(),
            segmenter: SegmenterConfig::default(),
        }
    }
}

impl DocumentPipeline {
    pub fn process(
        &self,
        doc: &RawDocument,
        embedder: &dyn SentenceEmbedder,
    ) -> Result<ProcessedPolicy, DocumentError> {
        let clean = clean_html(doc)?;
        let text = filter_language(&clean, &self.primary_language, self.min_block_confidence)?;
        if self.apply_quality_gate {
            if let QualityVerdict::Reject(reason) = quality_check(&text) {
                return Err(DocumentError::Rejected(reason));
            }
        }
        let sentences = split_sentences(&text, &self.abbreviations);
        let segments = segment(&sentences, embedder, &self.segmenter)?;
        Ok(ProcessedPolicy {
            source_id: doc.source_id.clone(),
            word_count: text.word_count(),
            byte_size: text.byte_size(),
            sentences,
            segments,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::HashingEmbedder;

    #[test]
    fn raw_document_rejects_empty_content() {
        assert!(matches!(
            RawDocument::plain_text("x", ""),
            Err(DocumentError::EmptyDocument)
        ));
    }

    #[test]
    fn from_path_infers_media_kind() {
        let dir = tempfile::tempdir().unwrap();
        let html = dir.path().join("acme.HTML");
        std::fs::write(&html, "<p>hi</p>").unwrap();
        let txt = dir.path().join("acme.txt");
        std::fs::write(&txt, "hi").unwrap();
        let h = RawDocument::from_path(&html).unwrap();
        assert_eq!((h.media_kind, h.source_id.as_str()), (MediaKind::Html, "acme"));
        assert_eq!(RawDocument::from_path(&txt).unwrap().media_kind, MediaKind::PlainText);
    }

    #[test]
    fn clean_text_counts() {
        let t = CleanText::new("s", vec!["one two".into(), "three".into()]);
        assert_eq!(t.word_count(), 3);
        assert_eq!(t.byte_size(), "one two\n\nthree".len());
        assert_eq!(t.byte_size(), t.to_plain_text().len());
    }

    #[test]
    fn pipeline_rejects_short_policy() {
        let doc = RawDocument::html("p", "<p>We collect your email address.</p>").unwrap();
        let err = DocumentPipeline::default()
            .process(&doc, &HashingEmbedder::default())
            .unwrap_err();
        assert!(matches!(err, DocumentError::Rejected(RejectReason::TooShort)));
    }

    #[test]
    fn pipeline_without_gate_segments_everything() {
        let doc = RawDocument::html(
            "p",
            "<p>We collect your email address. We never sell it.</p><p>Contact us.</p>",
        )
        .unwrap();
        let pipeline = DocumentPipeline {
            apply_quality_gate: false,
            ..Default::default()
        };
        let out = pipeline.process(&doc, &HashingEmbedder::default()).unwrap();
        assert_eq!(out.sentences.len(), 3);
        let covered: usize = out.segments.iter().map(Segment::len).sum();
        assert_eq!(covered, 3);
    }
}
