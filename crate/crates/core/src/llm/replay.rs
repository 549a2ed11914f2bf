use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LlmClient, LlmError};

/// Lowercase hex SHA-256 of the UTF-8 prompt.
pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub prompt_sha256: String,
    pub answer: String,
}

/// Answers prompts from a recorded table; unknown prompts are an error.
#[derive(Debug, Clone, Default)]
pub struct Replay {
    answers: HashMap<String, String>,
}

impl Replay {
    /// Later entries for the same hash replace earlier ones.
    pub fn new(entries: impl IntoIterator<Item = ReplayEntry>) -> Self {
        Self {
            answers: entries
                .into_iter()
                .map(|e| (e.prompt_sha256.to_ascii_lowercase(), e.answer))
                .collect(),
        }
    }

    pub fn from_json(src: &str) -> Result<Self, LlmError> {
        let entries: Vec<ReplayEntry> =
            serde_json::from_str(src).map_err(|e| LlmError::Config(format!("replay file: {e}")))?;
        Ok(Self::new(entries))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

impl LlmClient for Replay {
    fn complete(&self, prompt: &str, _max_answer_words: usize) -> Result<String, LlmError> {
        let hash = prompt_sha256(prompt);
        self.answers
            .get(&hash)
            .cloned()
            .ok_or(LlmError::ReplayMiss(hash))
    }
}

/// Passes prompts through to another client and remembers the answers, so a
/// live run can be replayed later.
pub struct Recorder<C> {
    inner: C,
    entries: Mutex<Vec<ReplayEntry>>,
}

impl<C: LlmClient> Recorder<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            entries: Mutex::new(Vec::new()),
        }
    }

    /// Recorded entries sorted by hash, one per distinct prompt.
    pub fn entries(&self) -> Vec<ReplayEntry> {
        let mut entries = self.entries.lock().expect("recorder lock").clone();
        entries.sort_by(|a, b| a.prompt_sha256.cmp(&b.prompt_sha256));
        entries.dedup_by(|a, b| a.prompt_sha256 == b.prompt_sha256);
        entries
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.entries()).expect("entries serialize");
        s.push('\n');
        s
    }
}

impl<C: LlmClient> LlmClient for Recorder<C> {
    fn complete(&self, prompt: &str, max_answer_words: usize) -> Result<String, LlmError> {
        let answer = self.inner.complete(prompt, max_answer_words)?;
        self.entries.lock().expect("recorder lock").push(ReplayEntry {
            prompt_sha256: prompt_sha256(prompt),
            answer: answer.clone(),
        });
        Ok(answer)
    }
}
