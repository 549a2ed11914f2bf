use std::fmt;

use serde::{Deserialize, Serialize};

use super::CleanText;

/// Policies with fewer words are discarded as low quality.
pub const MIN_WORDS: usize = 200;
/// Policies smaller than 2 KB are discarded as low quality.
pub const MIN_BYTES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    TooShort,
    TooSmall,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooShort => write!(f, "TooShort (fewer than {MIN_WORDS} words)"),
            Self::TooSmall => write!(f, "TooSmall (smaller than {MIN_BYTES} bytes)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QualityVerdict {
    Accept,
    Reject(RejectReason),
}

/// Word count is checked before size.
pub fn quality_check(text: &CleanText) -> QualityVerdict {
    if text.word_count() < MIN_WORDS {
        QualityVerdict::Reject(RejectReason::TooShort)
    } else if text.byte_size() < MIN_BYTES {
        QualityVerdict::Reject(RejectReason::TooSmall)
    } else {
        QualityVerdict::Accept
    }
}
