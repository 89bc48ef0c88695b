//! Pure, allocation-only core of npm-filter.
//!
//! Everything in this crate works on strings and plain data: loading the
//! analysis configuration from JSON text, picking build/test scripts out of a
//! package manifest, classifying script commands against the known tool
//! catalog, parsing test-runner summaries, scheduling the requeue-on-error
//! build loop, and the result document types. Process execution, git,
//! network access and the filesystem live in the `npm-filter` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod build;
pub mod catalog;
pub mod config;
pub mod manifest;
pub mod ordered_map;
pub mod parsers;
pub mod registry;
pub mod report;
pub mod source;

pub use build::{BuildQueue, BuildStep};
pub use catalog::{classify_command, Classification, ToolCatalog};
pub use config::{AnalysisConfig, ConfigError, ConfigWarning};
pub use manifest::{select_commands, ManifestError, ManifestScripts};
pub use ordered_map::OrderedMap;
pub use parsers::{parse_framework_output, sniff_frameworks, strip_ansi, Framework, ParsedCounts};
pub use registry::{BackoffPolicy, RegistryError};
pub use report::{
    BuildReport, ExecutionOutcome, InstallReport, Installer, Metadata, QlQueryResult,
    ResultsDocument, ScriptRun, TestCommandReport,
};
pub use source::{PackageSource, RepoRef, SourceError};
