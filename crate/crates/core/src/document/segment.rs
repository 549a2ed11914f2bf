use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{DocumentError, Segment, Sentence};
use crate::embeddings::{cosine_similarity, SentenceEmbedder, Vector};

pub const MAX_SENTENCES_PER_SEGMENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    similarity_threshold: f64,
}

impl SegmenterConfig {
    pub const DEFAULT_THRESHOLD: f64 = 0.85;

    pub fn new(similarity_threshold: f64) -> Result<Self, DocumentError> {
        if (-1.0..=1.0).contains(&similarity_threshold) {
            Ok(Self { similarity_threshold })
        } else {
            Err(DocumentError::InvalidThreshold(similarity_threshold))
        }
    }

    pub fn similarity_threshold(&self) -> f64 {
        self.similarity_threshold
    }

    pub fn max_sentences_per_segment(&self) -> usize {
        MAX_SENTENCES_PER_SEGMENT
    }
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            similarity_threshold: Self::DEFAULT_THRESHOLD,
        }
    }
}

struct Open {
    start: usize,
    text: String,
    embedding: Vector,
}

impl Open {
    fn close(self, id: usize, end: usize) -> Segment {
        Segment {
            segment_id: id,
            sentence_indices: self.start..end,
            text: self.text,
            embedding: Some(self.embedding),
            categories: BTreeSet::new(),
        }
    }
}

/// Greedy left-to-right merge of sentences into segments.
///
/// The open segment absorbs the next sentence when the cosine between the
/// segment's full-text embedding and the sentence embedding reaches the
/// threshold and the segment is not yet full.
pub fn segment(
    sentences: &[Sentence],
    embedder: &dyn SentenceEmbedder,
    cfg: &SegmenterConfig,
) -> Result<Vec<Segment>, DocumentError> {
    let embed = |t: &str| embedder.embed(t).map_err(DocumentError::EmbeddingUnavailable);
    let mut out = Vec::new();
    let Some(first) = sentences.first() else {
        return Ok(out);
    };
    let mut open = Open {
        start: 0,
        text: first.text.clone(),
        embedding: embed(&first.text)?,
    };

    for (i, sentence) in sentences.iter().enumerate().skip(1) {
        let next = embed(&sentence.text)?;
        let similarity =
            cosine_similarity(&open.embedding, &next).map_err(DocumentError::EmbeddingUnavailable)?;
        if i - open.start < MAX_SENTENCES_PER_SEGMENT && similarity >= cfg.similarity_threshold {
            open.text.push(' ');
            open.text.push_str(&sentence.text);
            open.embedding = embed(&open.text)?;
        } else {
            let id = out.len();
            let done = std::mem::replace(
                &mut open,
                Open {
                    start: i,
                    text: sentence.text.clone(),
                    embedding: next,
                },
            );
            out.push(done.close(id, i));
        }
    }
    let id = out.len();
    out.push(open.close(id, sentences.len()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{EmbeddingError, WordVectorStore};
    use proptest::prelude::*;

    fn sentences(texts: &[&str]) -> Vec<Sentence> {
        texts
            .iter()
            .enumerate()
            .map(|(index, t)| Sentence { index, text: t.to_string() })
            .collect()
    }

    fn store() -> WordVectorStore {
        WordVectorStore::from_reader("3 2\nsame 1 1\nx 1 0\ny 0 1\n".as_bytes()).unwrap()
    }

    fn sizes(segs: &[Segment]) -> Vec<usize> {
        segs.iter().map(Segment::len).collect()
    }

    #[test]
    fn single_sentence() {
        let segs = segment(&sentences(&["same"]), &store(), &SegmenterConfig::default()).unwrap();
        assert_eq!(sizes(&segs), [1]);
        assert_eq!(segs[0].text, "same");
        assert!(segs[0].embedding.is_some());
    }

    #[test]
    fn identical_embeddings_fill_to_four() {
        let s = sentences(&["same"; 5]);
        let segs = segment(&s, &store(), &SegmenterConfig::default()).unwrap();
        assert_eq!(sizes(&segs), [4, 1]);
        assert_eq!(segs[0].text, "same same same same");
        assert_eq!(segs[1].sentence_indices, 4..5);
        assert_eq!(segs[1].segment_id, 1);
    }

    #[test]
    fn orthogonal_sentences_stay_apart() {
        let segs = segment(&sentences(&["x", "y"]), &store(), &SegmenterConfig::default()).unwrap();
        assert_eq!(sizes(&segs), [1, 1]);
    }

    #[test]
    fn compares_against_running_segment() {
        // "x" then "same": cos((1,0),(1,1)) = 0.707 merges at tau 0.7; the
        // segment becomes mean((1,0),(1,1)) = (1, .5), and "y" has cosine
        // 0.447 with it, so it starts a new segment.
        let cfg = SegmenterConfig::new(0.7).unwrap();
        let segs = segment(&sentences(&["x", "same", "y"]), &store(), &cfg).unwrap();
        assert_eq!(sizes(&segs), [2, 1]);
    }

    #[test]
    fn zero_vectors_never_merge_for_positive_tau() {
        let cfg = SegmenterConfig::new(0.01).unwrap();
        let segs = segment(&sentences(&["oov", "oov"]), &store(), &cfg).unwrap();
        assert_eq!(sizes(&segs), [1, 1]);
    }

    #[test]
    fn threshold_range() {
        assert!(SegmenterConfig::new(1.5).is_err());
        assert!(SegmenterConfig::new(-1.0).is_ok());
        assert_eq!(SegmenterConfig::default().max_sentences_per_segment(), 4);
    }

    struct Broken;
    impl SentenceEmbedder for Broken {
        fn dimension(&self) -> usize {
            1
        }
        fn embed(&self, _: &str) -> Result<Vector, EmbeddingError> {
            Err(EmbeddingError::Unavailable("offline".into()))
        }
    }

    #[test]
    fn provider_failure() {
        assert!(matches!(
            segment(&sentences(&["a"]), &Broken, &SegmenterConfig::default()),
            Err(DocumentError::EmbeddingUnavailable(_))
        ));
    }

    proptest! {
        #[test]
        fn partition_property(picks in prop::collection::vec(0usize..3, 1..40), tau in -1.0f64..1.0) {
            let names = ["same", "x", "y"];
            let texts: Vec<&str> = picks.iter().map(|&i| names[i]).collect();
            let s = sentences(&texts);
            let cfg = SegmenterConfig::new(tau).unwrap();
            let segs = segment(&s, &store(), &cfg).unwrap();
            let mut next = 0;
            for (i, seg) in segs.iter().enumerate() {
                prop_assert_eq!(seg.segment_id, i);
                prop_assert_eq!(seg.sentence_indices.start, next);
                prop_assert!((1..=4).contains(&seg.len()));
                let joined: Vec<&str> = texts[seg.sentence_indices.clone()].to_vec();
                prop_assert_eq!(&seg.text, &joined.join(" "));
                next = seg.sentence_indices.end;
            }
            prop_assert_eq!(next, texts.len());
        }
    }
}
