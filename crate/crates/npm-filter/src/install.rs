//! Installing dependencies and listing what got installed.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use npm_filter_core::{AnalysisConfig, InstallReport, Installer};

use crate::acquisition::last_lines;
use crate::executor::Executor;

/// `yarn` when the repository has a `yarn.lock`, `npm` otherwise.
pub fn detect_package_manager(root: &Path) -> Installer {
    if root.join("yarn.lock").is_file() {
        Installer::Yarn
    } else {
        Installer::Npm
    }
}

/// Whether the install leaves out development dependencies. That is only
/// the case when dependencies are tracked without dev dependencies; test
/// runners are usually dev dependencies, so a plain analysis installs all.
pub fn production_install(cfg: &AnalysisConfig) -> bool {
    cfg.track_deps && !cfg.include_dev_deps
}

pub fn install(exec: &Executor, root: &Path, installer: Installer, cfg: &AnalysisConfig) -> InstallReport {
    let command = installer.install_command(production_install(cfg));
    match exec.run(command, root, cfg.install_timeout) {
        Ok(out) => InstallReport {
            installer_command: installer,
            timed_out: out.timed_out,
            error: out
                .failure_summary()
                .map(|why| format!("{why}\n{}", last_lines(&out.stderr, 20)).trim_end().to_owned()),
            output: cfg.verbose_mode.then_some(out),
        },
        Err(e) => InstallReport {
            installer_command: installer,
            timed_out: false,
            error: Some(e.to_string()),
            output: None,
        },
    }
}

/// Sorted, unique names of the packages directly under `node_modules`,
/// scoped packages as `@scope/name`. Hidden entries such as `.bin` are
/// skipped and nested `node_modules` are not visited.
pub fn enumerate_dependencies(root: &Path) -> Vec<String> {
    let mut names = BTreeSet::new();
    for entry in package_dirs(&root.join("node_modules")) {
        if entry.starts_with('@') {
            let scope = root.join("node_modules").join(&entry);
            names.extend(package_dirs(&scope).into_iter().map(|name| format!("{entry}/{name}")));
        } else {
            names.insert(entry);
        }
    }
    names.into_iter().collect()
}

fn package_dirs(dir: &Path) -> Vec<String> {
    let Ok(entries) = fs::read_dir(dir) else {
        return Vec::new();
    };
    entries
        .filter_map(Result::ok)
        // follows symlinks, which is how workspaces and `npm link` show up
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|name| !name.starts_with('.'))
        .collect()
}
