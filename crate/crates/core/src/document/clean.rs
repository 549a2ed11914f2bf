use ego_tree::iter::Edge;
use scraper::{Html, Node};

use super::{CleanText, DocumentError, MediaKind, RawDocument};

/// Elements whose whole subtree is boilerplate.
const SKIPPED: &[&str] = &[
    "script", "style", "head", "nav", "header", "footer", "noscript", "template",
];

/// Elements that start and end a text block.
const BLOCK_LEVEL: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "br", "caption", "dd", "details",
    "dialog", "div", "dl", "dt", "fieldset", "figcaption", "figure", "form", "h1", "h2", "h3",
    "h4", "h5", "h6", "hr", "html", "li", "main", "ol", "p", "pre", "section", "summary",
    "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul",
];

fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn flush(buf: &mut String, blocks: &mut Vec<String>) {
    let block = normalize_whitespace(buf);
    if !block.is_empty() {
        blocks.push(block);
    }
    buf.clear();
}

/// Strips boilerplate markup and returns the visible text as blocks.
///
/// Plain-text documents are split into blocks at blank lines.
pub fn clean_html(doc: &RawDocument) -> Result<CleanText, DocumentError> {
    let source = doc.text_lossy();
    let blocks = match doc.media_kind {
        MediaKind::Html => html_blocks(&source),
        MediaKind::PlainText => plain_blocks(&source),
    };
    if blocks.is_empty() {
        return Err(DocumentError::EmptyDocument);
    }
    Ok(CleanText::new(doc.source_id.clone(), blocks))
}

fn html_blocks(source: &str) -> Vec<String> {
    let html = Html::parse_document(source);
    let mut blocks = Vec::new();
    let mut buf = String::new();
    // Depth inside a skipped subtree; 0 means visible.
    let mut skip_depth = 0usize;

    for edge in html.tree.root().traverse() {
        match edge {
            Edge::Open(node) => match node.value() {
                Node::Element(el) => {
                    let name = el.name();
                    if skip_depth > 0 || SKIPPED.contains(&name) {
                        skip_depth += 1;
                    } else if BLOCK_LEVEL.contains(&name) {
                        flush(&mut buf, &mut blocks);
                    }
                }
                Node::Text(text) if skip_depth == 0 => buf.push_str(text),
                _ => {}
            },
            Edge::Close(node) => {
                if let Node::Element(el) = node.value() {
                    if skip_depth > 0 {
                        skip_depth -= 1;
                    } else if BLOCK_LEVEL.contains(&el.name()) {
                        flush(&mut buf, &mut blocks);
                    }
                }
            }
        }
    }
    flush(&mut buf, &mut blocks);
    blocks
}

fn plain_blocks(source: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut buf = String::new();
    for line in source.lines() {
        if line.trim().is_empty() {
            flush(&mut buf, &mut blocks);
        } else {
            buf.push_str(line);
            buf.push(' ');
        }
    }
    flush(&mut buf, &mut blocks);
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use regex::Regex;

    fn html(s: &str) -> Vec<String> {
        clean_html(&RawDocument::html("t", s).unwrap())
            .unwrap()
            .blocks()
            .to_vec()
    }

    /// Independent regex-based extractor used to cross-check fixtures.
    fn reference_extract(s: &str) -> Vec<String> {
        let drop = Regex::new(r"(?is)<(script|style|head|nav|header|footer)\b.*?</\s*(script|style|head|nav|header|footer)\s*>").unwrap();
        let blocks = Regex::new(r"(?i)</?(p|div|li|h[1-6]|br|section|article|body|html|ul|ol|tr|td|table)\b[^>]*>").unwrap();
        let tags = Regex::new(r"<[^>]*>").unwrap();
        let s = drop.replace_all(s, "");
        let s = blocks.replace_all(&s, "\n\n");
        let s = tags.replace_all(&s, "");
        s.split("\n\n")
            .map(normalize_whitespace)
            .filter(|b| !b.is_empty())
            .collect()
    }

    #[test]
    fn drops_script_in_head() {
        let src = "<html><head><script>x()</script></head><body><p>We collect email.</p></body></html>";
        assert_eq!(html(src), vec!["We collect email."]);
    }

    #[test]
    fn style_and_paragraphs_match_reference() {
        let src = "<style>p{}</style><p>A</p><p>B</p>";
        assert_eq!(html(src), vec!["A", "B"]);
        assert_eq!(html(src), reference_extract(src));
    }

    #[test]
    fn realistic_fixture_matches_reference() {
        let src = r#"<html><head><title>Privacy</title><style>.x{color:red}</style></head>
<body><header><a href="/">Home</a> | Menu</header><nav><ul><li>Terms</li></ul></nav>
<div><h2>Information   we collect</h2>
<p>We collect your <b>email address</b> and
   phone number.</p><p>We use cookies.<br>You can opt out.</p></div>
<script type="text/javascript">var a = "<p>not text</p>";</script>
<footer>&copy; 2023 Acme</footer></body></html>"#;
        let got = html(src);
        assert_eq!(
            got,
            vec![
                "Information we collect",
                "We collect your email address and phone number.",
                "We use cookies.",
                "You can opt out.",
            ]
        );
        assert_eq!(got, reference_extract(src));
    }

    #[test]
    fn decodes_entities() {
        assert_eq!(
            html("<p>Terms &amp; Conditions&nbsp;apply &lt;here&gt;</p>"),
            vec!["Terms & Conditions apply <here>"]
        );
    }

    #[test]
    fn plain_text_paragraphs() {
        let doc = RawDocument::plain_text("t", "We collect email.").unwrap();
        assert_eq!(clean_html(&doc).unwrap().blocks(), ["We collect email."]);
        let doc = RawDocument::plain_text("t", "A  b\nc\n\n  \nD\r\n").unwrap();
        assert_eq!(clean_html(&doc).unwrap().blocks(), ["A b c", "D"]);
    }

    #[test]
    fn markup_only_document_is_empty() {
        let doc = RawDocument::html("t", "<script>x</script><style></style>").unwrap();
        assert!(matches!(clean_html(&doc), Err(DocumentError::EmptyDocument)));
        let doc = RawDocument::plain_text("t", "  \n\n ").unwrap();
        assert!(matches!(clean_html(&doc), Err(DocumentError::EmptyDocument)));
    }

    proptest! {
        #[test]
        fn idempotent_through_plain_text(
            paras in prop::collection::vec("[A-Za-z&<> .,]{1,40}", 1..6)
        ) {
            let body: String = paras.iter().map(|p| format!("<p>{p}</p>")).collect();
            let doc = RawDocument::html("t", &body).unwrap();
            if let Ok(first) = clean_html(&doc) {
                let again = RawDocument::plain_text("t", &first.to_plain_text()).unwrap();
                let second = clean_html(&again).unwrap();
                prop_assert_eq!(first.blocks(), second.blocks());
                prop_assert_eq!(first.word_count(), second.word_count());
                prop_assert_eq!(first.byte_size(), second.byte_size());
            }
        }
    }
}
