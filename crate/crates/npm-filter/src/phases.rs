//! The build and test phases.

use std::path::Path;

use npm_filter_core::parsers::strip_ansi;
use npm_filter_core::{
    classify_command, parse_framework_output, sniff_frameworks, AnalysisConfig, BuildQueue,
    BuildReport, ExecutionOutcome, Framework, Installer, ManifestScripts, OrderedMap,
    TestCommandReport,
};

use crate::executor::Executor;

/// Runs the selected build scripts with requeue-on-error. Always returns, so
/// the test phase can run even when every build script failed.
pub fn run_build(
    exec: &Executor,
    root: &Path,
    installer: Installer,
    selected: &[String],
    cfg: &AnalysisConfig,
) -> BuildReport {
    let mut executions = Vec::new();
    let queue = BuildQueue::run(selected, |script| {
        let command = installer.run_script_command(script);
        let out = exec.run(&command, root, cfg.build_timeout).unwrap_or_else(|e| ExecutionOutcome {
            command,
            stderr: e.to_string(),
            exit_status: Some(-1),
            ..Default::default()
        });
        let ok = out.succeeded();
        if !ok {
            log::debug!("build script {script} failed: {}", out.failure_summary().unwrap_or_default());
        }
        executions.push(out);
        ok
    });
    BuildReport {
        build_script_list: queue.succeeded,
        failed_scripts: queue.failed,
        bailed: queue.bailed,
        executions: cfg.verbose_mode.then_some(executions),
    }
}

/// Runs each selected test script in turn and reports what it ran and how
/// many tests passed and failed.
pub fn run_tests(
    exec: &Executor,
    root: &Path,
    installer: Installer,
    selected: &[String],
    scripts: &ManifestScripts,
    cfg: &AnalysisConfig,
) -> OrderedMap<TestCommandReport> {
    let mut reports = OrderedMap::new();
    for name in selected {
        let body = scripts.get(name).unwrap_or_default();
        let command = installer.run_script_command(name);
        let outcome = exec.run(&command, root, cfg.test_timeout).unwrap_or_else(|e| ExecutionOutcome {
            command,
            stderr: e.to_string(),
            exit_status: Some(-1),
            ..Default::default()
        });
        reports.insert(name.as_str(), test_report(name, body, scripts, &outcome, cfg.verbose_mode));
    }
    reports
}

/// The report for one finished test command.
pub fn test_report(
    name: &str,
    body: &str,
    scripts: &ManifestScripts,
    outcome: &ExecutionOutcome,
    verbose: bool,
) -> TestCommandReport {
    let class = classify_command(name, body, scripts.names());
    let output = strip_ansi(&outcome.combined_output());

    let mut frameworks = class.frameworks;
    if frameworks.is_empty() && class.nested.is_empty() {
        frameworks = sniff_frameworks(&output);
    }
    let (passing, failing, counted) = count_tests(&frameworks, &output);

    TestCommandReport {
        num_passing: passing,
        num_failing: failing,
        test_infras: frameworks,
        linters: class.linters,
        coverage_tools: class.coverage_tools,
        nested_test_commands: class.nested,
        runs_new_user_tests: counted,
        timed_out: outcome.timed_out,
        error: outcome.failure_summary(),
        raw_output: verbose.then(|| outcome.combined_output()),
    }
}

/// Sums the counts of every framework whose parser recognized the output.
/// The third value is whether any of them saw at least one test.
///
/// gulp is only parsed when no other framework was named, since its parser
/// reads whichever runner it wraps and would count that runner twice.
fn count_tests(frameworks: &[Framework], output: &str) -> (u64, u64, bool) {
    let only_gulp = frameworks.iter().all(|f| *f == Framework::Gulp);
    let mut sum = (0, 0, false);
    for &fw in frameworks {
        if fw == Framework::Gulp && !only_gulp {
            continue;
        }
        let parsed = parse_framework_output(fw, output);
        if parsed.recognized && parsed.total() > 0 {
            sum.0 += parsed.passing;
            sum.1 += parsed.failing;
            sum.2 = true;
        }
    }
    sum
}
