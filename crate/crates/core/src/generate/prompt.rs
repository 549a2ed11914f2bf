use crate::schema::{render_question, Attribute, Presence, Section, TemplateError};

/// Context placeholder used when no segment is relevant. Generation never
/// sends such a prompt; it answers Absent directly.
pub const EMPTY_CONTEXT: &str = "(no relevant statements found)";
pub const ANSWER_INSTRUCTION: &str = "Answer yes or no.";

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub app_name: String,
    pub context: String,
    pub question: String,
    pub rendered: String,
    pub word_count: usize,
}

impl Prompt {
    /// Frames an already rendered question around a context string.
    pub fn new(app_name: &str, context: &str, question: &str) -> Self {
        let shown = if context.trim().is_empty() { EMPTY_CONTEXT } else { context };
        let rendered = format!(
            "App name: {app_name}.\nPrivacy policy excerpts:\n{shown}\nQuestion: {question} {ANSWER_INSTRUCTION}"
        );
        Self {
            app_name: app_name.to_string(),
            context: context.to_string(),
            question: question.to_string(),
            word_count: word_count(&rendered),
            rendered,
        }
    }
}

/// The section's question about one attribute, for one app.
pub fn question_for(app_name: &str, section: &Section, attr: &Attribute) -> Result<String, TemplateError> {
    render_question(&section.question_template, app_name, &attr.name, &attr.description)
}

/// Context is the segment texts in the given order, separated by blank lines.
pub fn build_prompt<'a>(
    app_name: &str,
    segments: impl IntoIterator<Item = &'a crate::document::Segment>,
    section: &Section,
    attr: &Attribute,
) -> Result<Prompt, TemplateError> {
    let context = segments
        .into_iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join("\n\n");
    Ok(Prompt::new(app_name, &context, &question_for(app_name, section, attr)?))
}

/// Present iff the first word, after leading punctuation, is "yes".
pub fn parse_answer(text: &str) -> Presence {
    let rest = text.trim_start_matches(|c: char| !c.is_alphanumeric());
    let first: String = rest.chars().take_while(|c| c.is_alphanumeric()).collect();
    Presence::from(first.to_lowercase() == "yes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::Segment;
    use crate::schema::LabelSchema;

    fn seg(text: &str) -> Segment {
        Segment {
            segment_id: 0,
            sentence_indices: 0..1,
            text: text.into(),
            embedding: None,
            categories: Default::default(),
        }
    }

    #[test]
    fn prompt_holds_app_context_and_question() {
        let g = LabelSchema::google();
        let section = &g.sections[0];
        let attr = section.attribute("Email address").unwrap();
        let segs = [seg("We collect your IP address and device model.")];
        let p = build_prompt("Easy Booster", &segs, section, attr).unwrap();
        assert!(p.rendered.contains("Easy Booster"));
        assert!(p.rendered.contains("We collect your IP address"));
        assert!(p.rendered.contains("Email address (A user's email address)"));
        assert!(p.rendered.ends_with("Answer yes or no."));
        assert_eq!(p.word_count, p.rendered.split_whitespace().count());
    }

    #[test]
    fn empty_context_placeholder() {
        let g = LabelSchema::google();
        let section = &g.sections[2];
        let p = build_prompt("A", [], section, &section.attributes[0]).unwrap();
        assert!(p.rendered.contains(EMPTY_CONTEXT));
        assert!(p.question.contains("Data is encrypted in transit"));
    }

    #[test]
    fn context_joins_with_blank_lines() {
        let g = LabelSchema::google();
        let section = &g.sections[0];
        let segs = [seg("One."), seg("Two.")];
        let p = build_prompt("A", &segs, section, &section.attributes[0]).unwrap();
        assert_eq!(p.context, "One.\n\nTwo.");
    }

    #[test]
    fn unknown_placeholder_is_a_template_error() {
        let mut section = LabelSchema::google().sections[0].clone();
        section.question_template = "Does {app} collect it?".into();
        let attr = section.attributes[0].clone();
        assert!(build_prompt("A", [], &section, &attr).is_err());
    }

    #[test]
    fn answers() {
        assert_eq!(parse_answer("Yes, the app collects email addresses."), Presence::Present);
        assert_eq!(parse_answer("No."), Presence::Absent);
        assert_eq!(parse_answer("  YES—definitely"), Presence::Present);
        assert_eq!(parse_answer("\"yes\""), Presence::Present);
        assert_eq!(parse_answer("Yesterday we said no"), Presence::Absent);
        assert_eq!(parse_answer("Possibly, yes."), Presence::Absent);
        assert_eq!(parse_answer(""), Presence::Absent);
    }
}
