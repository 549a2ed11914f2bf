//! Label generation: one yes/no question per label attribute, asked over
//! the policy text relevant to the attribute's section.
//!
//! [`Strategy::Hybrid`] feeds the segments whose categories map to the
//! section. [`Strategy::FullLlm`] first has the model copy relevant sentences
//! out of the whole document for every question, then asks over those.

mod chunk;
mod cost;
mod prompt;
mod retrieve;

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::document::{AbbreviationTable, ProcessedPolicy, Segment};
use crate::llm::{LlmClient, LlmError, RetryPolicy};
use crate::schema::{select_segments, Evidence, LabelSchema, Origin, Presence, PrivacyLabel, TemplateError};

pub use chunk::{chunk_context, chunk_segments, ContextChunk};
pub use cost::{CostMeter, CostStats};
pub use prompt::{build_prompt, parse_answer, question_for, word_count, Prompt, ANSWER_INSTRUCTION, EMPTY_CONTEXT};
pub use retrieve::{retrieval_prompt, retrieve_relevant, Retrieval};

/// Words that mark a clause as applying only to some audience or region.
pub const GROUP_MARKERS: [&str; 5] = ["child", "under 13", "California", "EEA", "European"];

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("question template for {section}/{attribute}: {source}")]
    Template {
        section: String,
        attribute: String,
        source: TemplateError,
    },
    #[error("model call failed for {section}/{attribute} after {completed} of {total} attributes were answered: {source}")]
    Llm {
        section: String,
        attribute: String,
        completed: usize,
        total: usize,
        source: LlmError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Hybrid,
    FullLlm,
}

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub strategy: Strategy,
    /// Most policy words placed in one prompt.
    pub context_word_limit: usize,
    pub max_concurrent_requests: usize,
    pub retry: RetryPolicy,
    /// Words the model accepts in prompt and answer together.
    pub model_window_words: usize,
    /// Room reserved for the prompt frame and question.
    pub question_budget_words: usize,
    /// Room reserved for a yes/no answer.
    pub answer_budget_words: usize,
    pub abbreviations: AbbreviationTable,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Hybrid,
            context_word_limit: 1200,
            max_concurrent_requests: 4,
            retry: RetryPolicy::default(),
            model_window_words: 1500,
            question_budget_words: 200,
            answer_budget_words: 100,
            abbreviations: AbbreviationTable::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerateError> {
        let bad = |m: String| Err(GenerateError::InvalidConfig(m));
        if self.context_word_limit == 0 {
            return bad("context word limit must be positive".into());
        }
        if self.max_concurrent_requests == 0 {
            return bad("at least one concurrent request is needed".into());
        }
        let needed = self.context_word_limit + self.question_budget_words + self.answer_budget_words;
        if needed > self.model_window_words {
            return bad(format!(
                "context limit {} plus question {} and answer {} exceed the {}-word window",
                self.context_word_limit, self.question_budget_words, self.answer_budget_words, self.model_window_words
            ));
        }
        Ok(())
    }

    /// Retrieval chunks take half the context budget; the copied sentences
    /// may take the other half.
    pub fn retrieval_chunk_words(&self) -> usize {
        (self.context_word_limit / 2).max(1)
    }
}

/// A generated label with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub label: PrivacyLabel,
    pub strategy: Strategy,
    pub cost: CostStats,
    /// Retrieval lines that matched no sentence (FullLlm only).
    pub unmatched_retrieval_lines: usize,
}

/// Group markers present in `text`, in [`GROUP_MARKERS`] order.
pub fn group_markers(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    GROUP_MARKERS
        .iter()
        .filter(|m| {
            let m = m.to_lowercase();
            lower.match_indices(&m).any(|(i, _)| {
                !lower[..i].chars().next_back().is_some_and(char::is_alphanumeric)
            })
        })
        .map(|m| m.to_string())
        .collect()
}

struct Outcome {
    presence: Presence,
    evidence: Vec<Evidence>,
    unmatched: usize,
}

enum JobError {
    Template(TemplateError),
    Llm(LlmError),
}

impl From<TemplateError> for JobError {
    fn from(e: TemplateError) -> Self {
        JobError::Template(e)
    }
}

impl From<LlmError> for JobError {
    fn from(e: LlmError) -> Self {
        JobError::Llm(e)
    }
}

struct Job<'a> {
    policy: &'a ProcessedPolicy,
    app_name: &'a str,
    cfg: &'a GenerationConfig,
    llm: &'a dyn LlmClient,
    meter: &'a CostMeter,
}

impl Job<'_> {
    fn ask(&self, section: &crate::schema::Section, attr: &crate::schema::Attribute) -> Result<Outcome, JobError> {
        let question = question_for(self.app_name, section, attr)?;
        let (segments, unmatched): (Vec<Segment>, usize) = match self.cfg.strategy {
            Strategy::Hybrid => (
                select_segments(section, &self.policy.segments).into_iter().cloned().collect(),
                0,
            ),
            Strategy::FullLlm => {
                let r = retrieve_relevant(&self.policy.sentences, &question, self.cfg, self.llm, self.meter)?;
                (r.segments, r.unmatched_lines)
            }
        };
        let mut presence = Presence::Absent;
        let mut evidence = Vec::new();
        for chunk in chunk_segments(&segments, self.cfg.context_word_limit, &self.cfg.abbreviations) {
            let prompt = Prompt::new(self.app_name, &chunk.text, &question);
            let overhead = prompt.word_count - chunk.word_count();
            if overhead > self.cfg.question_budget_words {
                tracing::warn!(overhead, "question exceeds its word budget");
            }
            let answer = self
                .cfg
                .retry
                .complete(self.llm, &prompt.rendered, self.cfg.answer_budget_words)?;
            self.meter.record(prompt.word_count, word_count(&answer));
            if parse_answer(&answer).is_present() {
                presence = Presence::Present;
            }
            evidence.push(Evidence {
                segment_ids: chunk.segment_ids,
                answer,
                group_markers: group_markers(&chunk.text),
            });
        }
        Ok(Outcome {
            presence,
            evidence,
            unmatched,
        })
    }
}

/// Answers every attribute of `schema` for one processed policy.
///
/// Sections with no relevant text are Absent without a model call. Chunk
/// answers are combined with OR. Any model failure that survives the retry
/// policy aborts the run.
pub fn generate_label(
    policy: &ProcessedPolicy,
    app_name: &str,
    schema: &LabelSchema,
    cfg: &GenerationConfig,
    llm: &dyn LlmClient,
) -> Result<Generation, GenerateError> {
    cfg.validate()?;
    let pairs: Vec<_> = schema.pairs().collect();
    let meter = CostMeter::default();
    let job = Job {
        policy,
        app_name,
        cfg,
        llm,
        meter: &meter,
    };

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..pairs.len()).map(|_| None).collect());
    let failure: Mutex<Option<(usize, JobError)>> = Mutex::new(None);
    let workers = cfg.max_concurrent_requests.min(pairs.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((section, attr)) = pairs.get(i) else { break };
                match job.ask(section, attr) {
                    Ok(outcome) => results.lock().expect("results lock")[i] = Some(outcome),
                    Err(e) => {
                        abort.store(true, Ordering::SeqCst);
                        let mut f = failure.lock().expect("failure lock");
                        if f.as_ref().is_none_or(|(j, _)| i < *j) {
                            *f = Some((i, e));
                        }
                        break;
                    }
                }
            });
        }
    });

    let results = results.into_inner().expect("results lock");
    if let Some((i, e)) = failure.into_inner().expect("failure lock") {
        let (section, attr) = pairs[i];
        let (section, attribute) = (section.name.clone(), attr.name.clone());
        return Err(match e {
            JobError::Template(source) => GenerateError::Template { section, attribute, source },
            JobError::Llm(source) => GenerateError::Llm {
                section,
                attribute,
                completed: results.iter().filter(|r| r.is_some()).count(),
                total: pairs.len(),
                source,
            },
        });
    }

    let mut label = PrivacyLabel::absent(schema, Origin::Generated);
    let mut provenance = IndexMap::new();
    let mut unmatched = 0;
    for ((section, attr), outcome) in pairs.iter().zip(results) {
        let outcome = outcome.expect("every job finished");
        label.set(&section.name, &attr.name, outcome.presence);
        unmatched += outcome.unmatched;
        if !outcome.evidence.is_empty() {
            provenance.insert(PrivacyLabel::key(&section.name, &attr.name), outcome.evidence);
        }
    }
    label.provenance = Some(provenance);
    Ok(Generation {
        label,
        strategy: cfg.strategy,
        cost: meter.snapshot(),
        unmatched_retrieval_lines: unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::DataPracticeCategory as C;
    use crate::document::Sentence;
    use crate::llm::{KeywordMock, MockRule, Replay};
    use std::collections::BTreeSet;

    fn policy(parts: &[(&str, &[C])]) -> ProcessedPolicy {
        let sentences: Vec<_> = parts
            .iter()
            .enumerate()
            .map(|(index, (t, _))| Sentence { index, text: t.to_string() })
            .collect();
        let segments = parts
            .iter()
            .enumerate()
            .map(|(i, (t, cats))| Segment {
                segment_id: i,
                sentence_indices: i..i + 1,
                text: t.to_string(),
                embedding: None,
                categories: cats.iter().copied().collect::<BTreeSet<_>>(),
            })
            .collect();
        ProcessedPolicy {
            source_id: "p".into(),
            word_count: 0,
            byte_size: 0,
            sentences,
            segments,
        }
    }

    struct Fixed(&'static str);
    impl LlmClient for Fixed {
        fn complete(&self, _: &str, _: usize) -> Result<String, LlmError> {
            Ok(self.0.into())
        }
    }

    struct Failing;
    impl LlmClient for Failing {
        fn complete(&self, _: &str, _: usize) -> Result<String, LlmError> {
            Err(LlmError::Transport("down".into()))
        }
    }

    fn fast() -> GenerationConfig {
        GenerationConfig {
            retry: RetryPolicy { retries: 1, base_delay: std::time::Duration::ZERO },
            ..GenerationConfig::default()
        }
    }

    #[test]
    fn uniform_no_gives_all_absent() {
        let p = policy(&[("We collect data.", &[C::FirstPartyCollection, C::ThirdPartySharing, C::DataSecurity])]);
        let g = LabelSchema::google();
        let out = generate_label(&p, "A", &g, &fast(), &Fixed("No.")).unwrap();
        assert_eq!(out.label.values.len(), 78);
        assert_eq!(out.label.present_count(), 0);
        assert_eq!(out.cost.prompts_sent, 78);
    }

    #[test]
    fn single_keyword_fires_one_attribute() {
        let p = policy(&[
            ("We collect your email address when you sign up.", &[C::FirstPartyCollection]),
            ("We keep records for a year.", &[C::DataRetention]),
        ]);
        let mock = KeywordMock::new(vec![MockRule {
            attribute: "Email address".into(),
            evidence: vec!["email".into()],
        }]);
        let g = LabelSchema::google();
        let out = generate_label(&p, "A", &g, &fast(), &mock).unwrap();
        let present: Vec<_> = out.label.values.iter().filter(|(_, v)| v.is_present()).map(|(k, _)| k.as_str()).collect();
        assert_eq!(present, ["First-party data collected/Email address"]);
        let prov = out.label.provenance.as_ref().unwrap();
        assert_eq!(prov["First-party data collected/Email address"][0].segment_ids, [0]);
    }

    #[test]
    fn empty_mapping_sends_nothing() {
        let p = policy(&[("We collect things.", &[C::FirstPartyCollection])]);
        let g = LabelSchema::google();
        let out = generate_label(&p, "A", &g, &fast(), &Fixed("Yes.")).unwrap();
        assert_eq!(out.label.get("Security practices", "Encryption"), Some(Presence::Absent));
        assert_eq!(out.cost.prompts_sent, 38);
        let prov = out.label.provenance.unwrap();
        assert!(!prov.contains_key("Security practices/Encryption"));
    }

    #[test]
    fn transport_failure_is_an_error_not_absent() {
        let p = policy(&[("We collect things.", &[C::FirstPartyCollection])]);
        let err = generate_label(&p, "A", &LabelSchema::google(), &fast(), &Failing).unwrap_err();
        match err {
            GenerateError::Llm { total, source, .. } => {
                assert_eq!(total, 78);
                assert!(matches!(source, LlmError::Transport(_)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let p = policy(&[("We collect email address and photos.", &[C::FirstPartyCollection])]);
        let g = LabelSchema::google();
        let rec = crate::llm::Recorder::new(KeywordMock::default());
        let live = generate_label(&p, "A", &g, &fast(), &rec).unwrap();
        let replay = Replay::from_json(&rec.to_json()).unwrap();
        let a = generate_label(&p, "A", &g, &fast(), &replay).unwrap();
        let b = generate_label(&p, "A", &g, &fast(), &replay).unwrap();
        assert_eq!(a.label.to_json(), b.label.to_json());
        assert_eq!(a.label, live.label);
    }

    #[test]
    fn full_llm_costs_more_than_hybrid() {
        let p = policy(&[
            ("We collect your email address.", &[C::FirstPartyCollection]),
            ("All data is encrypted in transit.", &[C::DataSecurity]),
        ]);
        let g = LabelSchema::google();
        let hybrid = generate_label(&p, "A", &g, &fast(), &KeywordMock::default()).unwrap();
        let cfg = GenerationConfig { strategy: Strategy::FullLlm, ..fast() };
        let full = generate_label(&p, "A", &g, &cfg, &KeywordMock::default()).unwrap();
        assert!(full.cost.prompt_words > hybrid.cost.prompt_words);
        assert_eq!(full.label.get("First-party data collected", "Email address"), Some(Presence::Present));
        assert_eq!(full.label.get("Security practices", "Encryption"), Some(Presence::Present));
    }

    #[test]
    fn config_validation() {
        assert!(GenerationConfig::default().validate().is_ok());
        let too_big = GenerationConfig { context_word_limit: 1300, ..GenerationConfig::default() };
        assert!(matches!(too_big.validate(), Err(GenerateError::InvalidConfig(_))));
        let zero = GenerationConfig { context_word_limit: 0, ..GenerationConfig::default() };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn markers() {
        assert_eq!(group_markers("Children under 13 in California"), ["child", "under 13", "California"]);
        assert!(group_markers("We use the GEEAX format").is_empty());
        assert_eq!(group_markers("residents of the EEA"), ["EEA"]);
    }
}
