use std::collections::BTreeSet;

use crate::document::{Segment, Sentence};
use crate::llm::{LlmClient, LlmError};

use super::chunk::chunk_lines;
use super::cost::CostMeter;
use super::prompt::word_count;
use super::GenerationConfig;

/// Sentences a retrieval model pointed at, as one-sentence segments whose
/// ids are the sentence indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Retrieval {
    pub segments: Vec<Segment>,
    /// Returned lines that matched no source sentence.
    pub unmatched_lines: usize,
}

pub fn retrieval_prompt(part: usize, parts: usize, chunk: &str, question: &str) -> String {
    format!(
        "Here is part {part} of {parts} of a privacy policy.\n{chunk}\nQuestion: {question}\nCopy verbatim the sentences relevant to answering this question, or reply NONE."
    )
}

/// Lowercased, whitespace-collapsed, without list markers or wrapping quotes.
fn normalize(text: &str) -> String {
    let trimmed = text
        .trim()
        .trim_start_matches(['-', '*', '•', '>'])
        .trim_matches(|c: char| c.is_whitespace() || matches!(c, '"' | '\'' | '“' | '”' | '`'));
    trimmed
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Asks the model, chunk by chunk over the whole document, to copy out the
/// sentences relevant to `question`, then maps the copies back to sentences.
pub fn retrieve_relevant(
    sentences: &[Sentence],
    question: &str,
    cfg: &GenerationConfig,
    llm: &dyn LlmClient,
    meter: &CostMeter,
) -> Result<Retrieval, LlmError> {
    let limit = cfg.retrieval_chunk_words();
    let chunks = chunk_lines(sentences.iter().map(|s| (s.index, s.text.as_str())), limit);
    let normalized: Vec<(usize, String)> = sentences.iter().map(|s| (s.index, normalize(&s.text))).collect();
    let mut found = BTreeSet::new();
    let mut unmatched = 0;
    for (i, (chunk, ids)) in chunks.iter().enumerate() {
        let prompt = retrieval_prompt(i + 1, chunks.len(), chunk, question);
        let answer = cfg.retry.complete(llm, &prompt, limit)?;
        meter.record(word_count(&prompt), word_count(&answer));
        for line in answer.lines() {
            let line = normalize(line);
            if line.is_empty() || line == "none" {
                continue;
            }
            let hit = normalized
                .iter()
                .filter(|(idx, _)| ids.contains(idx))
                .find(|(_, s)| s.contains(&line));
            match hit {
                Some((idx, _)) => {
                    found.insert(*idx);
                }
                None => {
                    tracing::warn!(line = %line, "retrieved line matches no sentence");
                    unmatched += 1;
                }
            }
        }
    }
    let segments = found
        .into_iter()
        .filter_map(|idx| sentences.iter().find(|s| s.index == idx))
        .map(|s| Segment {
            segment_id: s.index,
            sentence_indices: s.index..s.index + 1,
            text: s.text.clone(),
            embedding: None,
            categories: BTreeSet::new(),
        })
        .collect();
    Ok(Retrieval {
        segments,
        unmatched_lines: unmatched,
    })
}
