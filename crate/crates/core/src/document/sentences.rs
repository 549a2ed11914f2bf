use std::collections::HashSet;
use std::path::Path;

use super::{CleanText, Sentence};

const DEFAULT_ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '\u{201c}', '\u{2018}'];

/// Words ending in a period that do not terminate a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbbreviationTable {
    entries: HashSet<String>,
}

impl AbbreviationTable {
    /// One abbreviation per line; blank lines and `#` comments are ignored.
    pub fn parse(src: &str) -> Self {
        let entries = src
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        Self { entries }
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for AbbreviationTable {
    fn default() -> Self {
        Self::parse(DEFAULT_ABBREVIATIONS)
    }
}

/// Splits every block into sentences; block ends always close a sentence.
pub fn split_sentences(text: &CleanText, abbreviations: &AbbreviationTable) -> Vec<Sentence> {
    text.blocks()
        .iter()
        .flat_map(|b| split_text(b, abbreviations))
        .enumerate()
        .map(|(index, text)| Sentence { index, text })
        .collect()
}

/// Sentence pieces of a single run of text.
///
/// A boundary is `.`, `!` or `?` (plus any closing quotes or brackets)
/// followed by whitespace and then an uppercase letter or digit, optionally
/// behind an opening quote or bracket. A period closing a word found in the
/// abbreviation table is never a boundary.
pub fn split_text(text: &str, abbreviations: &AbbreviationTable) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;

    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        if k == j || k == chars.len() {
            i = j.max(i + 1);
            continue;
        }
        let mut n = k;
        while n < chars.len() && OPENERS.contains(&chars[n].1) {
            n += 1;
        }
        let next_starts = chars
            .get(n)
            .is_some_and(|&(_, ch)| ch.is_uppercase() || ch.is_ascii_digit());
        let abbreviated = c == '.' && {
            let word_start = text[..pos]
                .rfind(char::is_whitespace)
                .map_or(0, |w| w + text[w..].chars().next().map_or(1, char::len_utf8));
            let word = text[word_start..pos + 1].trim_start_matches(OPENERS);
            abbreviations.contains(word)
        };
        if next_starts && !abbreviated {
            let piece = text[start..end].trim();
            if !piece.is_empty() {
                out.push(piece.to_string());
            }
            start = chars[k].0;
        }
        i = k;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail.to_string());
    }
    out
}
