//! Clone npm packages, install them, run their build and test scripts, and
//! record what happened.
//!
//! The pure parts (configuration, script selection, output parsing, the
//! results document) live in `npm-filter-core`; this crate runs processes,
//! talks to the registry and writes files.

pub mod acquisition;
pub mod batch;
pub mod cli;
pub mod custom;
pub mod executor;
pub mod install;
pub mod phases;
pub mod pipeline;
pub mod reporting;
pub mod resolution;

pub use acquisition::{cleanup, clone_repo, AcquireError, WorkingCopy};
pub use batch::{run_batch, BatchSummary};
pub use executor::{run_command, Executor};
pub use pipeline::Analyzer;
pub use reporting::{write_results, NameReserver};
pub use resolution::{ResolveError, Resolver, Throttle, Transport};
