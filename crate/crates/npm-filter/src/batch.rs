//! Analyzing many packages with a bounded number of workers.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use npm_filter_core::PackageSource;

use crate::pipeline::Analyzer;
use crate::reporting::NameReserver;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BatchSummary {
    /// Packages whose results file was written.
    pub analyzed: usize,
    /// Of those, the ones that stopped during resolution or cloning.
    pub setup_failed: usize,
    /// Packages whose results could not be written.
    pub write_failed: usize,
    /// Most analyses observed running at the same time.
    pub peak_in_flight: usize,
    /// Results files, in source order.
    pub results: Vec<PathBuf>,
}

/// Analyzes `sources` with at most `parallelism` in flight. Result names are
/// assigned in source order before any work starts, so the files produced
/// do not depend on scheduling.
pub fn run_batch(analyzer: &Analyzer, sources: &[PackageSource], parallelism: usize) -> BatchSummary {
    let mut reserver = NameReserver::new();
    let names: Vec<String> = sources.iter().map(|s| reserver.reserve(&s.package_name())).collect();

    let next = AtomicUsize::new(0);
    let in_flight = AtomicUsize::new(0);
    let peak = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<(PathBuf, bool)>>> = sources.iter().map(|_| Mutex::new(None)).collect();

    let workers = parallelism.max(1).min(sources.len());
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(source) = sources.get(i) else { break };
                let now = in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                peak.fetch_max(now, Ordering::SeqCst);
                match analyzer.analyze_and_write(source, &names[i]) {
                    Ok((path, doc)) => {
                        *slots[i].lock().unwrap() = Some((path, doc.setup_error.is_some() && doc.installation.is_none()));
                    }
                    Err(e) => log::error!("{}: cannot write results: {e}", names[i]),
                }
                in_flight.fetch_sub(1, Ordering::SeqCst);
            });
        }
    });

    let mut summary = BatchSummary { peak_in_flight: peak.into_inner(), ..Default::default() };
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some((path, setup_failed)) => {
                summary.analyzed += 1;
                summary.setup_failed += usize::from(setup_failed);
                summary.results.push(path);
            }
            None => summary.write_failed += 1,
        }
    }
    summary
}
