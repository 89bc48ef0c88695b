//! One package from source to results document.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use npm_filter_core::{
    select_commands, AnalysisConfig, ManifestScripts, Metadata, PackageSource, RepoRef,
    ResultsDocument,
};

use crate::acquisition::{cleanup, clone_repo};
use crate::custom::{run_ql_queries, run_scripts_over_code};
use crate::executor::Executor;
use crate::install::{detect_package_manager, enumerate_dependencies, install};
use crate::phases::{run_build, run_tests};
use crate::reporting::write_results;
use crate::resolution::Resolver;

pub struct Analyzer {
    pub config: AnalysisConfig,
    pub executor: Executor,
    pub resolver: Arc<Resolver>,
    /// Saved package page used instead of the registry (single package only).
    pub html_override: Option<PathBuf>,
    /// Where repositories are cloned.
    pub work_dir: PathBuf,
    pub output_dir: PathBuf,
}

impl Analyzer {
    /// Relative directories are taken relative to the current directory.
    pub fn new(config: AnalysisConfig, work_dir: PathBuf, output_dir: PathBuf) -> Self {
        let absolute = |p: PathBuf| std::path::absolute(&p).unwrap_or(p);
        Self {
            config,
            executor: Executor::new(),
            resolver: Arc::new(Resolver::public()),
            html_override: None,
            work_dir: absolute(work_dir),
            output_dir: absolute(output_dir),
        }
    }

    /// Runs every configured phase for `source`. `name` is the name results
    /// are filed under. Never fails: problems end up in the document.
    pub fn analyze(&self, source: &PackageSource, name: &str) -> ResultsDocument {
        let repo = match source {
            PackageSource::NpmPackage { name: package } => {
                match self.resolver.resolve(package, self.html_override.as_deref()) {
                    Ok(repo) => repo,
                    Err(e) => return ResultsDocument::setup_failure(Metadata::default(), e),
                }
            }
            PackageSource::RepoLink { url, .. } => match RepoRef::new(url, None) {
                Ok(repo) => repo,
                Err(e) => return ResultsDocument::setup_failure(Metadata::default(), e),
            },
        };
        let mut metadata = Metadata { repo_link: Some(repo.url.clone()), repo_commit_sha: None };

        let wc = match clone_repo(&self.executor, &repo, &self.work_dir, source.commit_sha()) {
            Ok(wc) => wc,
            Err(e) => return ResultsDocument::setup_failure(metadata, e),
        };
        if source.commit_sha().is_some() {
            metadata.repo_commit_sha = wc.commit_sha.clone();
        }
        log::info!("{name}: analyzing {} in {}", repo.url, wc.root.display());

        let mut doc = self.analyze_checkout(&wc.root, name);
        doc.metadata = metadata;
        cleanup(&wc, self.config.rm_after_cloning);
        doc
    }

    /// The phases after cloning, run on the checkout at `root`.
    pub fn analyze_checkout(&self, root: &Path, name: &str) -> ResultsDocument {
        let cfg = &self.config;
        let exec = &self.executor;
        let mut doc = ResultsDocument::default();

        let scripts = match fs::read_to_string(root.join("package.json")) {
            Ok(text) => ManifestScripts::from_json_str(&text).unwrap_or_else(|e| {
                doc.setup_error = Some(e.to_string());
                ManifestScripts::default()
            }),
            Err(e) => {
                doc.setup_error = Some(format!("cannot read package.json: {e}"));
                ManifestScripts::default()
            }
        };

        let installer = detect_package_manager(root);
        let install_report = install(exec, root, installer, cfg);
        if let Some(error) = &install_report.error {
            log::warn!("{name}: install failed: {}", error.lines().next().unwrap_or_default());
        }
        doc.installation = Some(install_report);
        if cfg.track_deps {
            doc.dependencies = Some(enumerate_dependencies(root));
        }

        if cfg.track_build {
            let selected = select_commands(
                &scripts,
                &cfg.tracked_build_commands,
                &cfg.ignored_commands,
                &cfg.ignored_substrings,
            );
            doc.build = Some(run_build(exec, root, installer, &selected, cfg));
        }
        if cfg.track_tests {
            let selected = select_commands(
                &scripts,
                &cfg.tracked_test_commands,
                &cfg.ignored_commands,
                &cfg.ignored_substrings,
            );
            doc.testing = Some(run_tests(exec, root, installer, &selected, &scripts, cfg));
        }
        if !cfg.scripts_over_code.is_empty() {
            doc.scripts_over_code =
                Some(run_scripts_over_code(exec, root, &cfg.scripts_over_code, cfg.test_timeout));
        }
        if !cfg.ql_queries.is_empty() {
            doc.ql_queries = Some(run_ql_queries(
                exec,
                root,
                &cfg.ql_queries,
                name,
                &self.output_dir,
                &cfg.ql_engine,
                cfg.test_timeout,
            ));
        }
        doc
    }

    /// Analyzes `source` and writes its results file.
    pub fn analyze_and_write(&self, source: &PackageSource, name: &str) -> std::io::Result<(PathBuf, ResultsDocument)> {
        let doc = self.analyze(source, name);
        if let Some(error) = &doc.setup_error {
            log::warn!("{name}: {error}");
        }
        let path = write_results(&doc, name, &self.output_dir, self.config.verbose_mode)?;
        Ok((path, doc))
    }
}
