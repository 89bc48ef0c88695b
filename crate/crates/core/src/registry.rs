//! Extracting repository links from npm registry responses, and the retry
//! policy for talking to the registry.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use core::fmt;
use core::time::Duration;

use serde_json::Value;

use crate::source::normalize_repository_url;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryError {
    /// The package metadata has no usable repository reference.
    NoRepoLink { package: String },
    NetworkFailure(String),
    ParseFailure(String),
}

impl fmt::Display for RegistryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegistryError::NoRepoLink { package } => {
                write!(f, "no repository link found for package {package}")
            }
            RegistryError::NetworkFailure(msg) => write!(f, "registry request failed: {msg}"),
            RegistryError::ParseFailure(msg) => write!(f, "unrecognized registry response: {msg}"),
        }
    }
}

impl core::error::Error for RegistryError {}

/// Repository URL from a registry metadata document
/// (`GET https://registry.npmjs.org/<name>`).
///
/// Looks at the top-level `repository`, then at the `repository` of the
/// `latest` version.
pub fn repo_from_metadata(package: &str, json: &str) -> Result<String, RegistryError> {
    let doc: Value =
        serde_json::from_str(json).map_err(|e| RegistryError::ParseFailure(e.to_string()))?;
    if !doc.is_object() {
        return Err(RegistryError::ParseFailure("metadata is not a JSON object".to_owned()));
    }
    let latest = doc
        .pointer("/dist-tags/latest")
        .and_then(Value::as_str)
        .and_then(|v| doc.get("versions")?.get(v));
    let found = [doc.get("repository"), latest.and_then(|v| v.get("repository"))]
        .into_iter()
        .flatten()
        .find_map(repository_field_url);
    found.ok_or_else(|| RegistryError::NoRepoLink { package: package.to_owned() })
}

fn repository_field_url(field: &Value) -> Option<String> {
    let raw = match field {
        Value::String(s) => s.as_str(),
        Value::Object(o) => o.get("url")?.as_str()?,
        _ => return None,
    };
    normalize_repository_url(raw)
}

/// Repository URL from a saved or fetched npm package web page.
///
/// The sidebar link (`aria-labelledby="… repository-link"`) is preferred;
/// otherwise a `"repository"` entry in the page's embedded JSON is used.
pub fn repo_from_html(package: &str, html: &str) -> Result<String, RegistryError> {
    if !html.contains('<') {
        return Err(RegistryError::ParseFailure("not an HTML document".to_owned()));
    }
    if let Some(url) = sidebar_repository_link(html) {
        return Ok(url);
    }
    if let Some(url) = embedded_repository(html) {
        return Ok(url);
    }
    Err(RegistryError::NoRepoLink { package: package.to_owned() })
}

fn sidebar_repository_link(html: &str) -> Option<String> {
    let mut rest = html;
    while let Some(start) = rest.find("<a") {
        let tag_rest = &rest[start..];
        let end = tag_rest.find('>')?;
        let tag = &tag_rest[..end];
        if tag.contains("repository-link") {
            if let Some(url) = attribute(tag, "href").and_then(normalize_repository_url) {
                return Some(url);
            }
        }
        rest = &tag_rest[end..];
    }
    None
}

fn attribute<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
    let mut search = tag;
    loop {
        let pos = search.find(name)?;
        let after = search[pos + name.len()..].trim_start();
        let preceded_ok = search[..pos].ends_with(char::is_whitespace);
        if let (true, Some(value)) = (preceded_ok, after.strip_prefix('=')) {
            let value = value.trim_start();
            let quote = value.chars().next()?;
            if quote == '"' || quote == '\'' {
                let body = &value[1..];
                return body.find(quote).map(|e| &body[..e]);
            }
            let end = value.find(|c: char| c.is_whitespace()).unwrap_or(value.len());
            return Some(&value[..end]);
        }
        search = &search[pos + name.len()..];
    }
}

fn embedded_repository(html: &str) -> Option<String> {
    let mut rest = html;
    while let Some(pos) = rest.find("\"repository\"") {
        let after = rest[pos + "\"repository\"".len()..].trim_start();
        if let Some(value) = after.strip_prefix(':') {
            let mut stream = serde_json::Deserializer::from_str(value.trim_start()).into_iter::<Value>();
            if let Some(Ok(field)) = stream.next() {
                if let Some(url) = repository_field_url(&field) {
                    return Some(url);
                }
            }
        }
        rest = &rest[pos + 1..];
    }
    None
}

/// Exponential backoff for rate-limited registry requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackoffPolicy {
    pub initial: Duration,
    pub factor: u32,
    pub cap: Duration,
    /// Retries after the first attempt.
    pub max_retries: u32,
}

impl Default for BackoffPolicy {
    fn default() -> Self {
        Self {
            initial: Duration::from_secs(1),
            factor: 2,
            cap: Duration::from_secs(60),
            max_retries: 5,
        }
    }
}

impl BackoffPolicy {
    /// Delay before retry number `retry` (0-based), or `None` once retries
    /// are exhausted.
    pub fn delay(&self, retry: u32) -> Option<Duration> {
        if retry >= self.max_retries {
            return None;
        }
        let scale = self.factor.checked_pow(retry).unwrap_or(u32::MAX);
        Some(self.initial.checked_mul(scale).unwrap_or(self.cap).min(self.cap))
    }

    /// Upper bound on the total time spent sleeping between attempts.
    pub fn max_total_delay(&self) -> Duration {
        self.cap * self.max_retries
    }

    /// Whether an HTTP status means "slow down and try again".
    pub fn is_retryable(status: u16) -> bool {
        matches!(status, 429 | 503)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MEMFS: &str = "https://github.com/streamich/memfs";

    #[test]
    fn metadata_repository_forms() {
        let obj = r#"{"name":"memfs","repository":{"type":"git","url":"git+https://github.com/streamich/memfs.git"}}"#;
        assert_eq!(repo_from_metadata("memfs", obj).unwrap(), MEMFS);
        let s = r#"{"name":"memfs","repository":"streamich/memfs"}"#;
        assert_eq!(repo_from_metadata("memfs", s).unwrap(), MEMFS);
        let nested = r#"{"dist-tags":{"latest":"1.0.0"},"versions":{"1.0.0":{"repository":"github:streamich/memfs"}}}"#;
        assert_eq!(repo_from_metadata("memfs", nested).unwrap(), MEMFS);
    }

    #[test]
    fn metadata_without_repository() {
        assert_eq!(
            repo_from_metadata("ghost", r#"{"name":"ghost"}"#),
            Err(RegistryError::NoRepoLink { package: "ghost".into() })
        );
        assert!(matches!(repo_from_metadata("x", "<html>"), Err(RegistryError::ParseFailure(_))));
        assert!(matches!(repo_from_metadata("x", "[]"), Err(RegistryError::ParseFailure(_))));
    }

    #[test]
    fn html_sidebar_link() {
        let html = r#"<html><body><h3 id="repository">Repository</h3>
            <p><a class="b2812e30" aria-labelledby="repository repository-link" href="https://github.com/streamich/memfs" target="_blank" rel="noopener noreferrer"><span id="repository-link">github.com/streamich/memfs</span></a></p></body></html>"#;
        assert_eq!(repo_from_html("memfs", html).unwrap(), MEMFS);
    }

    #[test]
    fn html_embedded_json() {
        let html = r#"<html><script>window.__context__ = {"context":{"packument":{"name":"memfs","repository":"https://github.com/streamich/memfs.git"}}}</script></html>"#;
        assert_eq!(repo_from_html("memfs", html).unwrap(), MEMFS);
    }

    #[test]
    fn html_without_repository() {
        let html = "<html><body><h1>ghost-pkg</h1><a href=\"/package/other\">other</a></body></html>";
        assert_eq!(
            repo_from_html("ghost-pkg", html),
            Err(RegistryError::NoRepoLink { package: "ghost-pkg".into() })
        );
        assert!(matches!(repo_from_html("x", "plain text"), Err(RegistryError::ParseFailure(_))));
    }

    #[test]
    fn backoff_schedule() {
        let policy = BackoffPolicy::default();
        let delays: alloc::vec::Vec<_> = (0..7).map(|r| policy.delay(r)).collect();
        assert_eq!(
            delays,
            [1, 2, 4, 8, 16].map(|s| Some(Duration::from_secs(s))).into_iter()
                .chain([None, None])
                .collect::<alloc::vec::Vec<_>>()
        );
        let capped = BackoffPolicy { max_retries: 10, ..policy };
        assert_eq!(capped.delay(9), Some(Duration::from_secs(60)));
        assert_eq!(policy.max_total_delay(), Duration::from_secs(300));
        assert!(BackoffPolicy::is_retryable(429) && !BackoffPolicy::is_retryable(404));
    }
}
