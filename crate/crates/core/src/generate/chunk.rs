use crate::document::{split_text, AbbreviationTable, Segment};

use super::prompt::word_count;

/// One context string and the segments it draws from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextChunk {
    pub text: String,
    pub segment_ids: Vec<usize>,
}

impl ContextChunk {
    pub fn word_count(&self) -> usize {
        word_count(&self.text)
    }
}

/// Cuts `text` into pieces of at most `limit` words, at sentence boundaries
/// where possible and at word boundaries otherwise.
fn pieces(text: &str, limit: usize, abbreviations: &AbbreviationTable) -> Vec<String> {
    if word_count(text) <= limit {
        return vec![text.to_string()];
    }
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let sentences = split_text(text, abbreviations);
    for sentence in &sentences {
        let words: Vec<&str> = sentence.split_whitespace().collect();
        if words.len() > limit {
            if !current.is_empty() {
                out.push(current.join(" "));
                current.clear();
            }
            out.extend(words.chunks(limit).map(|c| c.join(" ")));
        } else {
            if current.len() + words.len() > limit {
                out.push(current.join(" "));
                current.clear();
            }
            current.extend(words);
        }
    }
    if !current.is_empty() {
        out.push(current.join(" "));
    }
    out
}

/// Packs segments in order into chunks of at most `word_limit` words.
/// Whole segments are kept together when they fit; segments are separated by
/// a blank line.
pub fn chunk_segments<'a>(
    segments: impl IntoIterator<Item = &'a Segment>,
    word_limit: usize,
    abbreviations: &AbbreviationTable,
) -> Vec<ContextChunk> {
    assert!(word_limit > 0, "word limit must be positive");
    let mut chunks = Vec::new();
    let mut text = String::new();
    let mut ids: Vec<usize> = Vec::new();
    let mut words = 0;
    for segment in segments {
        for piece in pieces(&segment.text, word_limit, abbreviations) {
            let n = word_count(&piece);
            if n == 0 {
                continue;
            }
            if words + n > word_limit && words > 0 {
                chunks.push(ContextChunk {
                    text: std::mem::take(&mut text),
                    segment_ids: std::mem::take(&mut ids),
                });
                words = 0;
            }
            if !text.is_empty() {
                text.push_str("\n\n");
            }
            text.push_str(&piece);
            words += n;
            if ids.last() != Some(&segment.segment_id) {
                ids.push(segment.segment_id);
            }
        }
    }
    if words > 0 {
        chunks.push(ContextChunk { text, segment_ids: ids });
    }
    chunks
}

/// Text-only view of [`chunk_segments`].
pub fn chunk_context<'a>(segments: impl IntoIterator<Item = &'a Segment>, word_limit: usize) -> Vec<String> {
    chunk_segments(segments, word_limit, &AbbreviationTable::default())
        .into_iter()
        .map(|c| c.text)
        .collect()
}

/// Packs lines (sentences) into chunks of at most `word_limit` words joined
/// by newlines. Returns each chunk with the indices of the lines it holds.
pub(crate) fn chunk_lines<'a>(
    lines: impl IntoIterator<Item = (usize, &'a str)>,
    word_limit: usize,
) -> Vec<(String, Vec<usize>)> {
    assert!(word_limit > 0, "word limit must be positive");
    let mut chunks = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut ids = Vec::new();
    let mut words = 0;
    for (id, line) in lines {
        let all: Vec<&str> = line.split_whitespace().collect();
        for part in all.chunks(word_limit) {
            if words + part.len() > word_limit && words > 0 {
                chunks.push((current.join("\n"), std::mem::take(&mut ids)));
                current.clear();
                words = 0;
            }
            current.push(part.join(" "));
            words += part.len();
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
    }
    if words > 0 {
        chunks.push((current.join("\n"), ids));
    }
    chunks
}
