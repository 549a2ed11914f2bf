use whatlang::Lang;

use super::{CleanText, DocumentError};

pub const DEFAULT_MIN_BLOCK_CONFIDENCE: f64 = 0.5;

/// Blocks with fewer words than this take the verdict of their neighbour.
pub const SHORT_BLOCK_WORDS: usize = 5;

fn resolve(code: &str) -> Result<Lang, DocumentError> {
    let unsupported = || DocumentError::UnsupportedLanguage(code.to_string());
    let three = match code.len() {
        2 => isolang::Language::from_639_1(&code.to_ascii_lowercase())
            .ok_or_else(unsupported)?
            .to_639_3(),
        _ => return Err(unsupported()),
    };
    Lang::from_code(three).ok_or_else(unsupported)
}

/// Drops blocks detected as a language other than `primary`.
///
/// A block is only judged when it has at least [`SHORT_BLOCK_WORDS`] words
/// and the detector reaches `min_block_confidence`; other blocks inherit the
/// previous judged block's verdict (leading ones the first judged block's).
/// With no judged block at all the text is kept unchanged.
pub fn filter_language(
    text: &CleanText,
    primary: &str,
    min_block_confidence: f64,
) -> Result<CleanText, DocumentError> {
    let primary_lang = resolve(primary)?;

    let verdicts: Vec<Option<bool>> = text
        .blocks()
        .iter()
        .map(|block| {
            if block.split_whitespace().count() < SHORT_BLOCK_WORDS {
                return None;
            }
            whatlang::detect(block)
                .filter(|info| info.confidence() >= min_block_confidence)
                .map(|info| info.lang() == primary_lang)
        })
        .collect();

    let first_judged = verdicts.iter().flatten().next().copied().unwrap_or(true);
    let mut current = first_judged;
    let kept: Vec<String> = text
        .blocks()
        .iter()
        .zip(&verdicts)
        .filter_map(|(block, verdict)| {
            if let Some(v) = verdict {
                current = *v;
            }
            current.then(|| block.clone())
        })
        .collect();

    if kept.is_empty() {
        return Err(DocumentError::NonPrimaryLanguageDocument(primary.to_string()));
    }
    Ok(CleanText::new(text.source_id.clone(), kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EN: &str = "We collect your email address when you create an account and use it to send you service updates.";
    const FR: &str = "Nous collectons votre adresse e-mail lorsque vous créez un compte et nous l'utilisons pour vous envoyer des mises à jour.";
    const FR2: &str = "Nous ne vendons jamais vos données personnelles à des tiers sans votre consentement explicite.";

    fn text(blocks: &[&str]) -> CleanText {
        CleanText::new("t", blocks.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn fixtures_detect_as_expected() {
        // Locks the detector's behaviour on the fixtures used below.
        assert_eq!(whatlang::detect(EN).unwrap().lang(), Lang::Eng);
        assert_eq!(whatlang::detect(FR).unwrap().lang(), Lang::Fra);
        assert_eq!(whatlang::detect(FR2).unwrap().lang(), Lang::Fra);
    }

    #[test]
    fn drops_french_paragraph() {
        let out = filter_language(&text(&[EN, FR]), "en", 0.5).unwrap();
        assert_eq!(out.blocks(), [EN]);
        assert_eq!(out.word_count(), EN.split_whitespace().count());
        assert_eq!(out.byte_size(), EN.len());
    }

    #[test]
    fn english_document_unchanged() {
        let t = text(&[EN, "Contact us", EN]);
        assert_eq!(filter_language(&t, "en", 0.5).unwrap(), t);
    }

    #[test]
    fn all_french_is_rejected() {
        assert!(matches!(
            filter_language(&text(&[FR, FR2]), "en", 0.5),
            Err(DocumentError::NonPrimaryLanguageDocument(_))
        ));
    }

    #[test]
    fn short_blocks_follow_neighbours() {
        let t = text(&["Politique", FR, "Contactez-nous", EN, "Contact us"]);
        let out = filter_language(&t, "en", 0.5).unwrap();
        assert_eq!(out.blocks(), [EN, "Contact us"]);
    }

    #[test]
    fn only_short_blocks_are_kept() {
        let t = text(&["Privacy Policy", "Contact us"]);
        assert_eq!(filter_language(&t, "en", 0.5).unwrap(), t);
    }

    #[test]
    fn primary_can_be_french() {
        let out = filter_language(&text(&[EN, FR]), "fr", 0.5).unwrap();
        assert_eq!(out.blocks(), [FR]);
    }

    #[test]
    fn unknown_code() {
        assert!(matches!(
            filter_language(&text(&[EN]), "zz", 0.5),
            Err(DocumentError::UnsupportedLanguage(_))
        ));
    }
}
