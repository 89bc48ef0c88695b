//! The per-package results document.
//!
//! Top-level keys, in order: `installation`, `dependencies`, `build`,
//! `testing`, `scripts_over_code`, `QL_queries`, `metadata`, `setup_error`.
//! A key is absent when its phase did not run.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::ordered_map::OrderedMap;
use crate::parsers::Framework;

fn is_false(b: &bool) -> bool {
    !*b
}

/// Captured result of one external command.
///
/// `exit_status` is `None` exactly when the command timed out.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub command: String,
    pub stdout: String,
    pub stderr: String,
    pub exit_status: Option<i32>,
    pub timed_out: bool,
    pub duration_ms: u64,
}

impl ExecutionOutcome {
    pub fn succeeded(&self) -> bool {
        !self.timed_out && self.exit_status == Some(0)
    }

    /// `stdout + "\n" + stderr`, the text handed to output parsers.
    pub fn combined_output(&self) -> String {
        format!("{}\n{}", self.stdout, self.stderr)
    }

    /// A one-line description of why the command did not succeed.
    pub fn failure_summary(&self) -> Option<String> {
        if self.timed_out {
            return Some(format!("timed out after {} ms", self.duration_ms));
        }
        match self.exit_status {
            Some(0) => None,
            Some(code) => Some(format!("exited with status {code}")),
            None => Some(String::from("terminated without an exit status")),
        }
    }
}

/// Package manager used to install and run scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Installer {
    Npm,
    Yarn,
}

impl Installer {
    /// Shell command installing dependencies; `production` leaves out
    /// development dependencies.
    pub fn install_command(self, production: bool) -> &'static str {
        match (self, production) {
            (Installer::Npm, false) => "npm install --no-audit --no-fund",
            (Installer::Npm, true) => "npm install --no-audit --no-fund --omit=dev",
            (Installer::Yarn, false) => "yarn install --non-interactive",
            (Installer::Yarn, true) => "yarn install --non-interactive --production",
        }
    }

    /// Shell command running manifest script `name`.
    pub fn run_script_command(self, name: &str) -> String {
        let quoted = shell_quote(name);
        match self {
            Installer::Npm => format!("npm run {quoted}"),
            Installer::Yarn => format!("yarn run {quoted}"),
        }
    }
}

impl fmt::Display for Installer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Installer::Npm => "npm",
            Installer::Yarn => "yarn",
        })
    }
}

/// Single-quotes `s` for a POSIX shell.
pub fn shell_quote(s: &str) -> String {
    if !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | ':' | '.' | '/' | '@'))
    {
        return s.into();
    }
    format!("'{}'", s.replace('\'', r"'\''"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstallReport {
    pub installer_command: Installer,
    #[serde(default, skip_serializing_if = "is_false")]
    pub timed_out: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Verbose mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<ExecutionOutcome>,
}

impl InstallReport {
    pub fn succeeded(&self) -> bool {
        !self.timed_out && self.error.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    /// Scripts that succeeded, in order of success.
    pub build_script_list: Vec<String>,
    pub failed_scripts: Vec<String>,
    /// True when the loop stopped after a pass with no successes.
    pub bailed: bool,
    /// Every execution in order. Verbose mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executions: Option<Vec<ExecutionOutcome>>,
}

/// Results for one test script, keyed by script name in
/// [`ResultsDocument::testing`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCommandReport {
    pub num_passing: u64,
    pub num_failing: u64,
    pub test_infras: Vec<Framework>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linters: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coverage_tools: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nested_test_commands: Vec<String>,
    pub runs_new_user_tests: bool,
    pub timed_out: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Verbose mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_output: Option<String>,
}

/// One user script run over the package source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptRun {
    pub script: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<ExecutionOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QlQueryResult {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repo_link: Option<String>,
    #[serde(rename = "repo_commit_SHA", default, skip_serializing_if = "Option::is_none")]
    pub repo_commit_sha: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub installation: Option<InstallReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependencies: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build: Option<BuildReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub testing: Option<OrderedMap<TestCommandReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scripts_over_code: Option<Vec<ScriptRun>>,
    #[serde(rename = "QL_queries", default, skip_serializing_if = "Option::is_none")]
    pub ql_queries: Option<Vec<QlQueryResult>>,
    pub metadata: Metadata,
    /// Why the analysis stopped before installation, or a manifest problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_error: Option<String>,
}

impl ResultsDocument {
    /// A document for a package whose analysis stopped during setup.
    pub fn setup_failure(metadata: Metadata, error: impl fmt::Display) -> Self {
        Self { metadata, setup_error: Some(format!("{error}")), ..Self::default() }
    }

    /// Drops every field that only verbose mode fills in.
    pub fn strip_verbose(&mut self) {
        if let Some(install) = &mut self.installation {
            install.output = None;
        }
        if let Some(build) = &mut self.build {
            build.executions = None;
        }
        if let Some(testing) = &mut self.testing {
            for report in testing.values_mut() {
                report.raw_output = None;
            }
        }
    }
}
