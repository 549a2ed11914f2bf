use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Model usage counted in words; pricing is left to the reader.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostStats {
    pub prompts_sent: u64,
    pub prompt_words: u64,
    pub answer_words: u64,
}

impl std::ops::AddAssign for CostStats {
    fn add_assign(&mut self, o: Self) {
        self.prompts_sent += o.prompts_sent;
        self.prompt_words += o.prompt_words;
        self.answer_words += o.answer_words;
    }
}

/// Thread-safe running totals.
#[derive(Debug, Default)]
pub struct CostMeter {
    prompts_sent: AtomicU64,
    prompt_words: AtomicU64,
    answer_words: AtomicU64,
}

impl CostMeter {
    pub fn record(&self, prompt_words: usize, answer_words: usize) {
        self.prompts_sent.fetch_add(1, Ordering::Relaxed);
        self.prompt_words.fetch_add(prompt_words as u64, Ordering::Relaxed);
        self.answer_words.fetch_add(answer_words as u64, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CostStats {
        CostStats {
            prompts_sent: self.prompts_sent.load(Ordering::Relaxed),
            prompt_words: self.prompt_words.load(Ordering::Relaxed),
            answer_words: self.answer_words.load(Ordering::Relaxed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concurrent_records_add_up() {
        let meter = CostMeter::default();
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    for _ in 0..100 {
                        meter.record(10, 2);
                    }
                });
            }
        });
        assert_eq!(
            meter.snapshot(),
            CostStats { prompts_sent: 800, prompt_words: 8000, answer_words: 1600 }
        );
    }
}
