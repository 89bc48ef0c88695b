mod common;

use std::collections::HashSet;
use std::path::Path;
use std::sync::Barrier;
use std::thread;

use common::*;
use npm_filter::acquisition::unique_dir;
use npm_filter::{run_batch, Analyzer, NameReserver};
use npm_filter_core::{AnalysisConfig, PackageSource};
use proptest::prelude::*;

fn analyzer(dir: &Path) -> Analyzer {
    let cfg = AnalysisConfig { track_build: false, ..Default::default() };
    let mut a = Analyzer::new(cfg, dir.join("work"), dir.join("out"));
    a.executor = executor();
    a
}

fn repo(name: &str, dir: &Path) -> PackageSource {
    PackageSource::repo(&fixture_repo(name, dir).0, None).unwrap()
}

#[test]
fn in_flight_bound_is_respected() {
    let tmp = tempfile::tempdir().unwrap();
    let sources: Vec<_> =
        ["tap-shell", "requeue", "all-fail", "nested-lint"].iter().map(|n| repo(n, tmp.path())).collect();
    let summary = run_batch(&analyzer(tmp.path()), &sources, 2);
    assert_eq!(summary.analyzed, 4);
    assert_eq!(summary.setup_failed, 0);
    assert!((1..=2).contains(&summary.peak_in_flight), "{}", summary.peak_in_flight);
    assert_eq!(std::fs::read_dir(tmp.path().join("out")).unwrap().count(), 4);
}

#[test]
fn more_workers_than_sources() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = run_batch(&analyzer(tmp.path()), &[repo("tap-shell", tmp.path())], 8);
    assert_eq!(summary.analyzed, 1);
    assert_eq!(summary.peak_in_flight, 1);
    assert!(run_batch(&analyzer(tmp.path()), &[], 8).results.is_empty());
}

#[test]
fn repeated_names_get_suffixes_in_source_order() {
    let tmp = tempfile::tempdir().unwrap();
    let a = repo("tap-shell", tmp.path());
    let missing = PackageSource::repo(
        &format!("file://{}/elsewhere/tap-shell", tmp.path().display()),
        None,
    )
    .unwrap();
    let summary = run_batch(&analyzer(tmp.path()), &[a, missing], 2);
    let names: Vec<_> =
        summary.results.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["tap-shell__results.json", "tap-shell-2__results.json"]);
    assert_eq!(summary.setup_failed, 1);
    assert!(read_json(&summary.results[1])["setup_error"].is_string());
    assert!(read_json(&summary.results[0]).get("setup_error").is_none());
}

#[test]
fn concurrent_working_directories_are_distinct() {
    let tmp = tempfile::tempdir().unwrap();
    let barrier = Barrier::new(16);
    let dirs: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = (0..16)
            .map(|_| {
                s.spawn(|| {
                    barrier.wait();
                    unique_dir(tmp.path(), "memfs").unwrap()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(dirs.iter().collect::<HashSet<_>>().len(), 16);
}

proptest! {
    #[test]
    fn reserved_names_are_distinct(names in proptest::collection::vec("[ab]{1,2}(-2)?", 0..20)) {
        let mut r = NameReserver::new();
        let reserved: Vec<String> = names.iter().map(|n| r.reserve(n)).collect();
        prop_assert_eq!(reserved.iter().collect::<HashSet<_>>().len(), reserved.len());
        if let Some(first) = names.first() {
            prop_assert_eq!(&reserved[0], first);
        }
    }
}
