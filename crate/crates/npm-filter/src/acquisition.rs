//! Cloning repositories into private working directories.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use npm_filter_core::report::shell_quote;
use npm_filter_core::RepoRef;

use crate::executor::Executor;

pub const CLONE_TIMEOUT: Duration = Duration::from_millis(300_000);

/// A checked-out repository owned by one analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkingCopy {
    pub root: PathBuf,
    pub repo_url: String,
    /// `HEAD` after checkout.
    pub commit_sha: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum AcquireError {
    #[error("cannot create working directory under {parent}: {source}")]
    WorkingDirectory { parent: PathBuf, source: io::Error },
    #[error("issue with the cloning of {url}: {detail}")]
    CloneFailure { url: String, detail: String },
    #[error("cannot check out commit {sha}: {detail}")]
    CheckoutFailure { sha: String, detail: String },
}

/// Clones `repo` into a new directory under `dest_parent` named after the
/// repository. A pinned clone fetches full history and checks out `commit`;
/// otherwise only the default branch tip is fetched.
pub fn clone_repo(
    exec: &Executor,
    repo: &RepoRef,
    dest_parent: &Path,
    commit: Option<&str>,
) -> Result<WorkingCopy, AcquireError> {
    let root = std::path::absolute(dest_parent)
        .and_then(|parent| unique_dir(&parent, &repo.name()))
        .map_err(|source| AcquireError::WorkingDirectory { parent: dest_parent.to_owned(), source })?;
    let result = clone_into(exec, repo, &root, commit);
    if result.is_err() {
        let _ = fs::remove_dir_all(&root);
    }
    result
}

fn clone_into(
    exec: &Executor,
    repo: &RepoRef,
    root: &Path,
    commit: Option<&str>,
) -> Result<WorkingCopy, AcquireError> {
    let clone_failure = |detail: String| AcquireError::CloneFailure { url: repo.url.clone(), detail };
    let depth = if commit.is_none() { "--depth 1 " } else { "" };
    let cmd = format!(
        "git clone --quiet {depth}-- {} {}",
        shell_quote(&repo.url),
        shell_quote(&root.to_string_lossy())
    );
    let out = exec
        .clone()
        .with_env("GIT_TERMINAL_PROMPT", "0")
        .run(&cmd, root, CLONE_TIMEOUT)
        .map_err(|e| clone_failure(e.to_string()))?;
    if !out.succeeded() {
        let why = out.failure_summary().unwrap_or_default();
        return Err(clone_failure(format!("{why}: {}", last_lines(&out.stderr, 5))));
    }

    if let Some(sha) = commit {
        let out = exec
            .run(
                &format!("git -c advice.detachedHead=false checkout --quiet {}", shell_quote(sha)),
                root,
                CLONE_TIMEOUT,
            )
            .map_err(|e| AcquireError::CheckoutFailure { sha: sha.to_owned(), detail: e.to_string() })?;
        if !out.succeeded() {
            return Err(AcquireError::CheckoutFailure {
                sha: sha.to_owned(),
                detail: last_lines(&out.stderr, 5),
            });
        }
    }

    let head = exec
        .run("git rev-parse HEAD", root, CLONE_TIMEOUT)
        .ok()
        .filter(|o| o.succeeded())
        .map(|o| o.stdout.trim().to_owned());
    if let (Some(want), Some(got)) = (commit, &head) {
        if !got.starts_with(want) {
            return Err(AcquireError::CheckoutFailure {
                sha: want.to_owned(),
                detail: format!("HEAD is {got}"),
            });
        }
    }
    Ok(WorkingCopy { root: root.to_owned(), repo_url: repo.url.clone(), commit_sha: head })
}

/// Removes the working copy when `remove` is set. Failures are logged and
/// returned as a warning, never as an error.
pub fn cleanup(wc: &WorkingCopy, remove: bool) -> Option<String> {
    if !remove {
        return None;
    }
    match fs::remove_dir_all(&wc.root) {
        Ok(()) => None,
        Err(e) => {
            let warning = format!("could not remove {}: {e}", wc.root.display());
            log::warn!("{warning}");
            Some(warning)
        }
    }
}

/// Creates `parent/<name>`, or `parent/<name>-2`, `-3`, ... if taken.
/// Creation is atomic, so concurrent callers never get the same directory.
pub fn unique_dir(parent: &Path, name: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(parent)?;
    let base = crate::reporting::file_stem(name);
    for n in 1.. {
        let candidate = if n == 1 { parent.join(&base) } else { parent.join(format!("{base}-{n}")) };
        match fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

pub(crate) fn last_lines(text: &str, n: usize) -> String {
    let lines: Vec<&str> = text.trim_end().lines().collect();
    lines[lines.len().saturating_sub(n)..].join("\n")
}
