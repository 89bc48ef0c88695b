//! What to analyze: npm package names, repository links, and the
//! repository-list file format.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceError {
    EmptyPackageName,
    InvalidUrl(String),
    InvalidCommitSha(String),
    /// A repository-list line with more than two tokens (1-based line number).
    TooManyTokens { line: usize },
}

impl fmt::Display for SourceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceError::EmptyPackageName => f.write_str("package name is empty"),
            SourceError::InvalidUrl(url) => write!(f, "not a repository URL: {url}"),
            SourceError::InvalidCommitSha(sha) => write!(f, "not a commit SHA: {sha}"),
            SourceError::TooManyTokens { line } => write!(
                f,
                "line {line}: expected a repository link and an optional commit SHA"
            ),
        }
    }
}

impl core::error::Error for SourceError {}

/// One package to analyze.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackageSource {
    /// Resolved to a repository through the npm registry.
    NpmPackage { name: String },
    /// Cloned directly, optionally pinned to a commit.
    RepoLink { url: String, commit_sha: Option<String> },
}

impl PackageSource {
    pub fn npm(name: &str) -> Result<Self, SourceError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(SourceError::EmptyPackageName);
        }
        Ok(Self::NpmPackage { name: name.to_owned() })
    }

    pub fn repo(url: &str, commit_sha: Option<&str>) -> Result<Self, SourceError> {
        if !is_url(url) {
            return Err(SourceError::InvalidUrl(url.to_owned()));
        }
        let commit_sha = commit_sha.map(validate_sha).transpose()?;
        Ok(Self::RepoLink { url: url.to_owned(), commit_sha })
    }

    /// The name results are filed under: the npm name, or the last path
    /// segment of the repository URL.
    pub fn package_name(&self) -> String {
        match self {
            Self::NpmPackage { name } => name.clone(),
            Self::RepoLink { url, .. } => repo_name(url),
        }
    }

    pub fn commit_sha(&self) -> Option<&str> {
        match self {
            Self::NpmPackage { .. } => None,
            Self::RepoLink { commit_sha, .. } => commit_sha.as_deref(),
        }
    }
}

impl fmt::Display for PackageSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NpmPackage { name } => f.write_str(name),
            Self::RepoLink { url, commit_sha: None } => f.write_str(url),
            Self::RepoLink { url, commit_sha: Some(sha) } => write!(f, "{url} @ {sha}"),
        }
    }
}

fn validate_sha(sha: &str) -> Result<String, SourceError> {
    if !sha.is_empty() && sha.chars().all(|c| c.is_ascii_hexdigit()) {
        Ok(sha.to_owned())
    } else {
        Err(SourceError::InvalidCommitSha(sha.to_owned()))
    }
}

/// A cloneable repository location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoRef {
    pub url: String,
    /// The npm package the link was found for, if any.
    pub source_package: Option<String>,
}

impl RepoRef {
    pub fn new(url: &str, source_package: Option<&str>) -> Result<Self, SourceError> {
        if !is_url(url) {
            return Err(SourceError::InvalidUrl(url.to_owned()));
        }
        Ok(Self { url: url.to_owned(), source_package: source_package.map(ToOwned::to_owned) })
    }

    pub fn name(&self) -> String {
        self.source_package.clone().unwrap_or_else(|| repo_name(&self.url))
    }
}

/// `scheme://rest` with a plausible scheme and a nonempty rest.
pub fn is_url(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once("://") else {
        return false;
    };
    !scheme.is_empty()
        && scheme.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && scheme.starts_with(|c: char| c.is_ascii_alphabetic())
        && !rest.is_empty()
        && !s.chars().any(char::is_whitespace)
}

/// The final path segment of a repository URL, without `.git`.
pub fn repo_name(url: &str) -> String {
    let trimmed = url.trim_end_matches('/');
    let last = trimmed.rsplit(['/', ':']).next().unwrap_or(trimmed);
    last.strip_suffix(".git").unwrap_or(last).to_owned()
}

/// Turns the forms found in `repository` fields into an `https://` clone
/// URL: `git+https://…`, `git://…`, `git+ssh://git@host/…`,
/// `git@host:owner/repo`, `github:owner/repo` and bare `owner/repo`.
/// Trailing `.git`, `/` and `#fragment` are dropped.
pub fn normalize_repository_url(raw: &str) -> Option<String> {
    let s = raw.trim();
    let s = s.split('#').next().unwrap_or(s);
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return None;
    }
    let s = s.strip_prefix("git+").unwrap_or(s);

    let url = if let Some(rest) = s.strip_prefix("git://") {
        format!("https://{rest}")
    } else if let Some(rest) = s.strip_prefix("ssh://") {
        let rest = rest.split_once('@').map_or(rest, |(_, host)| host);
        format!("https://{}", rest.replacen(':', "/", 1))
    } else if s.contains("://") {
        s.to_owned()
    } else if let Some(rest) = s.strip_prefix("git@") {
        let (host, path) = rest.split_once(':')?;
        format!("https://{host}/{path}")
    } else if let Some((host, path)) = s.split_once(':') {
        let host = match host {
            "github" => "github.com",
            "gitlab" => "gitlab.com",
            "bitbucket" => "bitbucket.org",
            "gist" => "gist.github.com",
            _ => return None,
        };
        format!("https://{host}/{path}")
    } else if s.split('/').count() == 2 && !s.starts_with('/') && !s.ends_with('/') {
        format!("https://github.com/{s}")
    } else {
        return None;
    };

    let url = url.trim_end_matches('/');
    let url = url.strip_suffix(".git").unwrap_or(url);
    is_url(url).then(|| url.to_owned())
}

/// Parses a repository-list file: one repository link per nonblank line,
/// optionally followed by a whitespace-separated commit SHA.
pub fn parse_repo_list(text: &str) -> Result<Vec<PackageSource>, SourceError> {
    let mut sources = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            [url] => sources.push(PackageSource::repo(url, None)?),
            [url, sha] => sources.push(PackageSource::repo(url, Some(sha))?),
            _ => return Err(SourceError::TooManyTokens { line: idx + 1 }),
        }
    }
    Ok(sources)
}
