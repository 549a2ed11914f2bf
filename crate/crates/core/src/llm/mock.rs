use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LlmClient, LlmError};

const DEFAULT_RULES: &str = include_str!("../../data/mock_rules.json");

const QUESTION_MARKER: &str = "\nQuestion: ";
const RETRIEVAL_MARKER: &str = "Copy verbatim";

/// Evidence phrases that make the mock answer yes for one attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    pub attribute: String,
    pub evidence: Vec<String>,
}

/// A deterministic stand-in for a real model.
///
/// The question is the text after the last `"\nQuestion: "` line and the
/// context is everything before it. The rule is picked by the attribute name
/// that occurs earliest in the question (longest on ties). Answer prompts get
/// "Yes" when an evidence phrase occurs in the context and "No." otherwise;
/// retrieval prompts get the context lines holding evidence, or `NONE`.
/// Matching is case-insensitive and on word boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordMock {
    rules: Vec<MockRule>,
}

/// Byte offset of the first word-bounded, case-insensitive occurrence.
fn find_word(haystack_lower: &str, needle: &str) -> Option<usize> {
    let needle = needle.to_lowercase();
    if needle.is_empty() {
        return None;
    }
    let is_word = |c: Option<char>| c.is_some_and(char::is_alphanumeric);
    let mut from = 0;
    while let Some(pos) = haystack_lower[from..].find(&needle) {
        let start = from + pos;
        let end = start + needle.len();
        let before = haystack_lower[..start].chars().next_back();
        let after = haystack_lower[end..].chars().next();
        let starts_word = !(is_word(before) && needle.starts_with(char::is_alphanumeric));
        let ends_word = !(is_word(after) && needle.ends_with(char::is_alphanumeric));
        if starts_word && ends_word {
            return Some(start);
        }
        from = start + haystack_lower[start..].chars().next().map_or(1, char::len_utf8);
    }
    None
}

impl KeywordMock {
    pub fn new(rules: Vec<MockRule>) -> Self {
        Self { rules }
    }

    pub fn from_json(src: &str) -> Result<Self, LlmError> {
        serde_json::from_str(src)
            .map(Self::new)
            .map_err(|e| LlmError::Config(format!("mock rules: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn rules(&self) -> &[MockRule] {
        &self.rules
    }

    fn rule_for(&self, question: &str) -> Option<&MockRule> {
        let lower = question.to_lowercase();
        self.rules
            .iter()
            .filter_map(|r| find_word(&lower, &r.attribute).map(|pos| (pos, r)))
            .min_by(|(pa, ra), (pb, rb)| pa.cmp(pb).then(rb.attribute.len().cmp(&ra.attribute.len())))
            .map(|(_, r)| r)
    }

    fn evidence_in<'a>(rule: &'a MockRule, text: &str) -> Option<&'a str> {
        let lower = text.to_lowercase();
        rule.evidence
            .iter()
            .find(|p| find_word(&lower, p).is_some())
            .map(String::as_str)
    }
}

impl Default for KeywordMock {
    fn default() -> Self {
        Self::from_json(DEFAULT_RULES).expect("bundled mock rules are valid")
    }
}

impl LlmClient for KeywordMock {
    fn complete(&self, prompt: &str, _max_answer_words: usize) -> Result<String, LlmError> {
        let (context, question) = match prompt.rfind(QUESTION_MARKER) {
            Some(i) => (&prompt[..i], &prompt[i + QUESTION_MARKER.len()..]),
            None => ("", prompt),
        };
        let rule = self.rule_for(question);
        if question.contains(RETRIEVAL_MARKER) {
            // The first line frames the chunk; the rest are policy sentences.
            let lines: Vec<&str> = context
                .lines()
                .skip(1)
                .filter(|l| rule.is_some_and(|r| Self::evidence_in(r, l).is_some()))
                .collect();
            return Ok(if lines.is_empty() { "NONE".into() } else { lines.join("\n") });
        }
        Ok(match rule.and_then(|r| Self::evidence_in(r, context)) {
            Some(phrase) => format!("Yes, the policy mentions {phrase}."),
            None => "No.".into(),
        })
    }
}
