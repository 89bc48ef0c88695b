//! Fixture helpers shared by the integration tests.
#![allow(dead_code)]

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Once;
use std::time::Duration;

use npm_filter::Executor;
use serde_json::{json, Map, Value};

pub const FIXTURES: &[&str] = &[
    "tap-shell",
    "requeue",
    "all-fail",
    "nested-lint",
    "mocha-real",
    "jest-real",
    "with-yarn-lock",
];

pub fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixtures_dir() -> PathBuf {
    manifest_dir().join("tests/fixtures")
}

/// The pinned test frameworks, installed on first use.
pub fn frameworks_bin() -> PathBuf {
    static INSTALL: Once = Once::new();
    let js = manifest_dir().join("tests/js");
    let bin = js.join("node_modules/.bin");
    INSTALL.call_once(|| {
        if bin.join("mocha").exists() && bin.join("jest").exists() {
            return;
        }
        let status = Command::new("npm")
            .args(["ci", "--no-audit", "--no-fund"])
            .current_dir(&js)
            .status()
            .expect("npm is required for the framework fixtures");
        assert!(status.success(), "npm ci in {} failed", js.display());
    });
    bin
}

/// `PATH` with the pinned frameworks in front.
pub fn path_with_frameworks() -> OsString {
    let mut paths = vec![frameworks_bin()];
    if let Some(path) = std::env::var_os("PATH") {
        paths.extend(std::env::split_paths(&path));
    }
    std::env::join_paths(paths).unwrap()
}

pub fn executor() -> Executor {
    Executor::new().with_env("PATH", path_with_frameworks().to_string_lossy())
}

fn copy_tree(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_tree(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

fn git(dir: &Path, args: &str) -> String {
    let out = Executor::new().run(&format!("git {args}"), dir, Duration::from_secs(60)).unwrap();
    assert!(out.succeeded(), "git {args}: {}", out.stderr);
    out.stdout.trim().to_owned()
}

/// Turns fixture package `name` into a git repository under `root` and
/// returns its `file://` URL and commit.
pub fn fixture_repo(name: &str, root: &Path) -> (String, String) {
    let repo = root.join("origin").join(name);
    copy_tree(&fixtures_dir().join("packages").join(name), &repo);
    git(&repo, "init --quiet -b main");
    git(&repo, "config user.email fixtures@example.com");
    git(&repo, "config user.name fixtures");
    git(&repo, "add -A");
    git(&repo, "commit --quiet -m fixture");
    let sha = git(&repo, "rev-parse HEAD");
    (format!("file://{}", repo.display()), sha)
}

pub fn golden(name: &str) -> Value {
    let text = fs::read_to_string(fixtures_dir().join("golden").join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// The fields of a results document that goldens pin down.
pub fn golden_projection(doc: &Value) -> Value {
    let mut testing = Map::new();
    if let Some(tests) = doc["testing"].as_object() {
        for (name, report) in tests {
            testing.insert(
                name.clone(),
                json!({
                    "num_passing": report["num_passing"],
                    "num_failing": report["num_failing"],
                    "test_infras": report["test_infras"],
                    "timed_out": report["timed_out"],
                }),
            );
        }
    }
    json!({
        "installer_command": doc["installation"]["installer_command"],
        "build_script_list": doc["build"]["build_script_list"],
        "testing": testing,
    })
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Runs `diagnose_github_repo` with the frameworks on `PATH`.
pub fn diagnose_repos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diagnose_github_repo"))
        .args(args)
        .env("PATH", path_with_frameworks())
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

pub fn diagnose_npm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diagnose_npm_package"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

/// Writes a configuration file and returns its path.
pub fn write_config(dir: &Path, value: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

/// Whether process `pid` is still alive (zombies count as gone).
pub fn process_alive(pid: u32) -> bool {
    match fs::read_to_string(format!("/proc/{pid}/stat")) {
        Ok(stat) => {
            let state = stat.rsplit_once(')').and_then(|(_, rest)| rest.split_whitespace().next());
            state != Some("Z")
        }
        Err(_) => false,
    }
}
