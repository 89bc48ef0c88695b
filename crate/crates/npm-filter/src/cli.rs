//! Command-line front ends shared by the two binaries.

use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{ArgAction, Args, CommandFactory, Parser};
use npm_filter_core::source::parse_repo_list;
use npm_filter_core::{AnalysisConfig, PackageSource};

use crate::batch::{run_batch, BatchSummary};
use crate::pipeline::Analyzer;

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file; defaults apply to anything it leaves out
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory receiving the results files
    #[arg(long = "output_dir", value_name = "DIR", default_value = ".")]
    pub output_dir: PathBuf,

    /// Maximum number of packages analyzed at once [default: number of CPUs]
    #[arg(long, value_name = "N")]
    pub parallelism: Option<NonZeroUsize>,

    /// Directory repositories are cloned into [default: <tmp>/npm-filter]
    #[arg(long = "work_dir", value_name = "DIR")]
    pub work_dir: Option<PathBuf>,
}

/// Analyze packages given as git repository links.
#[derive(Debug, Parser)]
#[command(name = "diagnose_github_repo", version)]
pub struct RepoArgs {
    /// File with one repository link per line, optionally followed by a commit SHA
    #[arg(long = "repo_list_file", value_name = "FILE")]
    pub repo_list_file: Option<PathBuf>,

    /// Repository link (repeatable)
    #[arg(long = "repo_link", value_name = "URL", action = ArgAction::Append)]
    pub repo_link: Vec<String>,

    /// Repository link and the commit to check out (repeatable)
    #[arg(
        long = "repo_link_and_SHA",
        num_args = 2,
        value_names = ["URL", "SHA"],
        action = ArgAction::Append
    )]
    pub repo_link_and_sha: Vec<String>,

    #[command(flatten)]
    pub common: CommonArgs,
}

/// Analyze packages by npm package name.
#[derive(Debug, Parser)]
#[command(name = "diagnose_npm_package", version)]
pub struct NpmArgs {
    /// Package names
    #[arg(long, value_name = "NAME", num_args = 1.., required = true)]
    pub packages: Vec<String>,

    /// Saved npm package page to read the repository link from instead of
    /// the registry; only valid with a single package
    #[arg(long, value_name = "FILE")]
    pub html: Option<PathBuf>,

    #[command(flatten)]
    pub common: CommonArgs,
}

impl RepoArgs {
    /// All requested sources: list file, then links, then pinned links.
    pub fn sources(&self) -> Result<Vec<PackageSource>, String> {
        let mut sources = Vec::new();
        if let Some(path) = &self.repo_list_file {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            sources.extend(parse_repo_list(&text).map_err(|e| format!("{}: {e}", path.display()))?);
        }
        for url in &self.repo_link {
            sources.push(PackageSource::repo(url, None).map_err(|e| e.to_string())?);
        }
        for pair in self.repo_link_and_sha.chunks(2) {
            sources.push(PackageSource::repo(&pair[0], Some(&pair[1])).map_err(|e| e.to_string())?);
        }
        Ok(sources)
    }
}

impl NpmArgs {
    pub fn sources(&self) -> Result<Vec<PackageSource>, String> {
        if self.html.is_some() && self.packages.len() != 1 {
            return Err("--html only works with exactly one package".to_owned());
        }
        self.packages.iter().map(|p| PackageSource::npm(p).map_err(|e| e.to_string())).collect()
    }
}

pub fn load_config(path: Option<&Path>) -> Result<AnalysisConfig, String> {
    let Some(path) = path else {
        return Ok(AnalysisConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (config, warnings) =
        AnalysisConfig::from_json_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for w in warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(config)
}

pub fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_secs()
        .init();
}

pub fn repo_main() -> ExitCode {
    init_logging();
    let args = RepoArgs::parse();
    let sources = match args.sources() {
        Ok(s) => s,
        Err(e) => RepoArgs::command().error(clap::error::ErrorKind::ValueValidation, e).exit(),
    };
    run(&args.common, sources, None)
}

pub fn npm_main() -> ExitCode {
    init_logging();
    let args = NpmArgs::parse();
    let sources = match args.sources() {
        Ok(s) => s,
        Err(e) => NpmArgs::command().error(clap::error::ErrorKind::ArgumentConflict, e).exit(),
    };
    run(&args.common, sources, args.html.clone())
}

fn run(common: &CommonArgs, sources: Vec<PackageSource>, html: Option<PathBuf>) -> ExitCode {
    let config = match load_config(common.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            log::error!("invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    if sources.is_empty() {
        log::info!("no packages given, nothing to do");
        return ExitCode::SUCCESS;
    }
    if let Err(e) = fs::create_dir_all(&common.output_dir) {
        log::error!("cannot create {}: {e}", common.output_dir.display());
        return ExitCode::FAILURE;
    }
    let work_dir = common.work_dir.clone().unwrap_or_else(|| std::env::temp_dir().join("npm-filter"));
    let mut analyzer = Analyzer::new(config, work_dir, common.output_dir.clone());
    analyzer.html_override = html;
    let parallelism = common
        .parallelism
        .or_else(|| thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get);

    let summary = run_batch(&analyzer, &sources, parallelism);
    report_summary(&summary, &common.output_dir);
    if summary.write_failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn report_summary(summary: &BatchSummary, output_dir: &Path) {
    for path in &summary.results {
        println!("{}", path.display());
    }
    log::info!(
        "{} analyzed ({} stopped during setup), results in {}",
        summary.analyzed,
        summary.setup_failed,
        output_dir.display()
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repo_flags() {
        let args = RepoArgs::try_parse_from([
            "diagnose_github_repo",
            "--repo_link",
            "https://github.com/a/one",
            "--repo_link_and_SHA",
            "https://github.com/streamich/memfs",
            "863f373185837141504c05ed19f7a253232e0905",
            "--output_dir",
            "out",
            "--parallelism",
            "3",
        ])
        .unwrap();
        let sources = args.sources().unwrap();
        assert_eq!(sources.len(), 2);
        assert_eq!(sources[1].commit_sha(), Some("863f373185837141504c05ed19f7a253232e0905"));
        assert_eq!(sources[1].package_name(), "memfs");
        assert_eq!(args.common.output_dir, PathBuf::from("out"));
        assert_eq!(args.common.parallelism.unwrap().get(), 3);
    }

    #[test]
    fn no_flags_means_no_sources() {
        let args = RepoArgs::try_parse_from(["diagnose_github_repo"]).unwrap();
        assert!(args.sources().unwrap().is_empty());
        assert!(RepoArgs::try_parse_from(["x", "--repo_link_and_SHA", "https://a/b"]).is_err());
        assert!(RepoArgs::try_parse_from(["x", "--parallelism", "0"]).is_err());
    }

    #[test]
    fn npm_flags() {
        assert!(NpmArgs::try_parse_from(["diagnose_npm_package"]).is_err());
        assert!(NpmArgs::try_parse_from(["diagnose_npm_package", "--packages"]).is_err());
        let one = NpmArgs::try_parse_from(["x", "--packages", "memfs", "--html", "p.html"]).unwrap();
        assert_eq!(one.sources().unwrap(), [PackageSource::npm("memfs").unwrap()]);
        let two = NpmArgs::try_parse_from(["x", "--packages", "a", "b", "--html", "p.html"]).unwrap();
        assert!(two.sources().is_err());
        let two = NpmArgs::try_parse_from(["x", "--packages", "a", "b"]).unwrap();
        assert_eq!(two.sources().unwrap().len(), 2);
    }

    #[test]
    fn config_loading() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(load_config(None).unwrap(), AnalysisConfig::default());
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"meta_info":{"VERBOSE_MODE":true}}"#).unwrap();
        assert!(load_config(Some(&path)).unwrap().verbose_mode);
        fs::write(&path, r#"{"test":{"timeout":0}}"#).unwrap();
        assert!(load_config(Some(&path)).is_err());
        assert!(load_config(Some(&dir.path().join("missing.json"))).is_err());
    }
}
