/// Placeholders a question template may use. `{{` and `}}` are literal braces.
const PLACEHOLDERS: [&str; 3] = ["app_name", "attribute_name", "attribute_description"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("unknown placeholder {{{0}}}")]
    UnknownPlaceholder(String),
    #[error("unbalanced brace at byte {0}")]
    UnbalancedBrace(usize),
}

fn expand(template: &str, mut value: impl FnMut(&str) -> Option<String>) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    let mut offset = 0;
    while let Some(pos) = rest.find(['{', '}']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if tail.starts_with("{{") || tail.starts_with("}}") {
            out.push_str(&tail[..1]);
            rest = &tail[2..];
            offset += pos + 2;
            continue;
        }
        if tail.starts_with('}') {
            return Err(TemplateError::UnbalancedBrace(offset + pos));
        }
        let close = tail.find('}').ok_or(TemplateError::UnbalancedBrace(offset + pos))?;
        let key = &tail[1..close];
        let v = value(key).ok_or_else(|| TemplateError::UnknownPlaceholder(key.to_string()))?;
        out.push_str(&v);
        rest = &tail[close + 1..];
        offset += pos + close + 1;
    }
    out.push_str(rest);
    Ok(out)
}

pub(crate) fn check(template: &str) -> Result<(), TemplateError> {
    expand(template, |k| PLACEHOLDERS.contains(&k).then(String::new)).map(|_| ())
}

/// Fills a section's question template.
pub fn render_question(
    template: &str,
    app_name: &str,
    attribute_name: &str,
    attribute_description: &str,
) -> Result<String, TemplateError> {
    expand(template, |k| match k {
        "app_name" => Some(app_name.to_string()),
        "attribute_name" => Some(attribute_name.to_string()),
        "attribute_description" => Some(attribute_description.to_string()),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fills_placeholders() {
        let q = render_question("Does {app_name} collect {attribute_name} ({attribute_description})?", "A", "B", "c").unwrap();
        assert_eq!(q, "Does A collect B (c)?");
    }

    #[test]
    fn escapes_and_errors() {
        assert_eq!(render_question("{{x}} {app_name}", "A", "", "").unwrap(), "{x} A");
        assert_eq!(
            render_question("{verb}", "", "", ""),
            Err(TemplateError::UnknownPlaceholder("verb".into()))
        );
        assert!(matches!(check("open { never closed"), Err(TemplateError::UnbalancedBrace(5))));
        assert!(matches!(check("stray }"), Err(TemplateError::UnbalancedBrace(6))));
        assert!(check("plain").is_ok());
    }

    #[test]
    fn values_are_not_reexpanded() {
        assert_eq!(render_question("{app_name}", "{attribute_name}", "x", "").unwrap(), "{attribute_name}");
    }
}
