use std::time::Duration;

use reqwest::header::CONTENT_TYPE;

use super::{DocumentError, MediaKind, RawDocument};

/// Downloads a policy over http(s).
///
/// The media kind follows the `Content-Type` header: `text/plain` becomes
/// plain text, everything else (including a missing header) is HTML.
pub fn fetch_policy(url: &str, timeout: Duration) -> Result<RawDocument, DocumentError> {
    let parsed = url::Url::parse(url).map_err(|_| DocumentError::InvalidUrl(url.to_string()))?;
    if !matches!(parsed.scheme(), "http" | "https") || parsed.host_str().is_none() {
        return Err(DocumentError::InvalidUrl(url.to_string()));
    }

    let client = reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| DocumentError::Network(e.to_string()))?;
    let resp = client
        .get(parsed.clone())
        .send()
        .map_err(|e| DocumentError::Network(e.to_string()))?;
    let status = resp.status();
    if !status.is_success() {
        return Err(DocumentError::Http(status.as_u16()));
    }
    let kind = match resp.headers().get(CONTENT_TYPE).and_then(|v| v.to_str().ok()) {
        Some(ct) if ct.trim_start().to_ascii_lowercase().starts_with("text/plain") => {
            MediaKind::PlainText
        }
        _ => MediaKind::Html,
    };
    let body = resp
        .bytes()
        .map_err(|e| DocumentError::Network(e.to_string()))?;

    let source_id = parsed
        .path_segments()
        .and_then(|mut s| s.next_back())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| parsed.host_str().unwrap_or("policy"))
        .to_string();
    let mut doc = RawDocument::new(source_id, body.to_vec(), kind)?;
    doc.fetched_from = Some(url.to_string());
    Ok(doc)
}
