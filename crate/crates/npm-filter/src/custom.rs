//! User-supplied shell scripts and CodeQL queries run over the source.

use std::env;
use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::Duration;

use npm_filter_core::report::shell_quote;
use npm_filter_core::{QlQueryResult, ScriptRun};

use crate::acquisition::last_lines;
use crate::executor::Executor;
use crate::reporting::file_stem;

/// Runs each script with the working copy as its current directory, in the
/// given order. A missing or failing script does not stop the rest.
pub fn run_scripts_over_code(
    exec: &Executor,
    root: &Path,
    script_paths: &[String],
    timeout: Duration,
) -> Vec<ScriptRun> {
    script_paths
        .iter()
        .map(|script| {
            let path = match absolute(Path::new(script)) {
                Some(p) if p.is_file() => p,
                _ => {
                    return ScriptRun {
                        script: script.clone(),
                        output: None,
                        error: Some(format!("script not found: {script}")),
                    }
                }
            };
            let quoted = shell_quote(&path.to_string_lossy());
            let executable = fs::metadata(&path).is_ok_and(|m| m.permissions().mode() & 0o111 != 0);
            let command = if executable { quoted } else { format!("sh {quoted}") };
            match exec.run(&command, root, timeout) {
                Ok(out) => ScriptRun { script: script.clone(), error: out.failure_summary(), output: Some(out) },
                Err(e) => ScriptRun { script: script.clone(), output: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Engine invocations. `{engine}`, `{db}`, `{src}`, `{query}`, `{bqrs}` and
/// `{csv}` are replaced by shell-quoted values.
pub const QL_DATABASE_CREATE: &str =
    "{engine} database create {db} --language=javascript --source-root={src} --overwrite --quiet";
pub const QL_QUERY_RUN: &str = "{engine} query run --database={db} --output={bqrs} -- {query}";
pub const QL_DECODE: &str = "{engine} bqrs decode --format=csv --output={csv} -- {bqrs}";

/// `<package>__<query-stem>__results.csv`
pub fn ql_csv_name(package: &str, query: &Path) -> String {
    let stem = query.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{}__{stem}__results.csv", file_stem(package))
}

/// Evaluates each query against one database built from the working copy
/// and writes the decoded results next to the results file.
pub fn run_ql_queries(
    exec: &Executor,
    root: &Path,
    query_paths: &[String],
    package: &str,
    output_dir: &Path,
    engine: &str,
    timeout: Duration,
) -> Vec<QlQueryResult> {
    if query_paths.is_empty() {
        return Vec::new();
    }
    let fail_all = |error: String| {
        query_paths
            .iter()
            .map(|q| QlQueryResult { query: q.clone(), results_csv: None, error: Some(error.clone()) })
            .collect()
    };
    let Some(engine_path) = find_program(engine) else {
        return fail_all(format!("analysis engine `{engine}` not found"));
    };
    let engine = engine_path.to_string_lossy().into_owned();

    let mut db_name = root.file_name().unwrap_or_default().to_os_string();
    db_name.push(".qldb");
    let db = root.with_file_name(db_name);
    let fill = |template: &str, extra: &[(&str, &Path)]| {
        let mut cmd = template
            .replace("{engine}", &shell_quote(&engine))
            .replace("{db}", &shell_quote(&db.to_string_lossy()))
            .replace("{src}", &shell_quote(&root.to_string_lossy()));
        for (key, value) in extra {
            cmd = cmd.replace(key, &shell_quote(&value.to_string_lossy()));
        }
        cmd
    };

    match exec.run(&fill(QL_DATABASE_CREATE, &[]), root, timeout) {
        Ok(out) if out.succeeded() => {}
        Ok(out) => {
            return fail_all(format!(
                "database creation {}: {}",
                out.failure_summary().unwrap_or_default(),
                last_lines(&out.stderr, 5)
            ))
        }
        Err(e) => return fail_all(format!("database creation: {e}")),
    }

    let results = query_paths
        .iter()
        .map(|query| {
            let mut result = QlQueryResult { query: query.clone(), results_csv: None, error: None };
            let Some(query_path) = absolute(Path::new(query)).filter(|p| p.is_file()) else {
                result.error = Some(format!("query not found: {query}"));
                return result;
            };
            let csv = output_dir.join(ql_csv_name(package, &query_path));
            let bqrs = csv.with_extension("bqrs");
            let steps = [
                fill(QL_QUERY_RUN, &[("{bqrs}", &bqrs), ("{query}", &query_path)]),
                fill(QL_DECODE, &[("{bqrs}", &bqrs), ("{csv}", &csv)]),
            ];
            for step in steps {
                match exec.run(&step, root, timeout) {
                    Ok(out) if out.succeeded() => {}
                    Ok(out) => {
                        result.error = Some(format!(
                            "{}: {}",
                            out.failure_summary().unwrap_or_default(),
                            last_lines(&out.stderr, 5)
                        ));
                        break;
                    }
                    Err(e) => {
                        result.error = Some(e.to_string());
                        break;
                    }
                }
            }
            let _ = fs::remove_file(&bqrs);
            if result.error.is_none() {
                result.results_csv = Some(csv.to_string_lossy().into_owned());
            }
            result
        })
        .collect();
    let _ = fs::remove_dir_all(&db);
    results
}

fn absolute(path: &Path) -> Option<PathBuf> {
    if path.is_absolute() {
        Some(path.to_owned())
    } else {
        env::current_dir().ok().map(|cwd| cwd.join(path))
    }
}

/// Looks `program` up like the shell would.
pub fn find_program(program: &str) -> Option<PathBuf> {
    let is_executable =
        |p: &Path| fs::metadata(p).is_ok_and(|m| m.is_file() && m.permissions().mode() & 0o111 != 0);
    if program.contains('/') {
        let path = absolute(Path::new(program))?;
        return is_executable(&path).then_some(path);
    }
    env::split_paths(&env::var_os("PATH")?)
        .map(|dir| dir.join(program))
        .find(|p| is_executable(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_script(dir: &Path, name: &str, body: &str) -> String {
        let path = dir.join(name);
        fs::write(&path, body).unwrap();
        path.to_string_lossy().into_owned()
    }

    #[test]
    fn scripts_run_in_order_and_keep_going() {
        let scripts = tempfile::tempdir().unwrap();
        let work = tempfile::tempdir().unwrap();
        fs::write(work.path().join("marker"), "").unwrap();
        let failing = write_script(scripts.path(), "fail.sh", "echo nope >&2; exit 4\n");
        let counting = write_script(scripts.path(), "count_files.sh", "ls | wc -l | tr -d ' '\n");
        let missing = scripts.path().join("absent.sh").to_string_lossy().into_owned();
        let runs = run_scripts_over_code(
            &Executor::new(),
            work.path(),
            &[failing.clone(), missing, counting],
            Duration::from_secs(10),
        );
        assert_eq!(runs.len(), 3);
        assert_eq!(runs[0].script, failing);
        assert_eq!(runs[0].output.as_ref().unwrap().exit_status, Some(4));
        assert!(runs[0].error.is_some());
        assert!(runs[1].output.is_none() && runs[1].error.as_deref().unwrap().contains("not found"));
        assert_eq!(runs[2].output.as_ref().unwrap().stdout, "1\n");
        assert_eq!(runs[2].error, None);
        assert!(run_scripts_over_code(&Executor::new(), work.path(), &[], Duration::from_secs(1)).is_empty());
    }

    #[test]
    fn absent_engine_fails_every_query() {
        let work = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let queries = vec!["a.ql".to_owned(), "b.ql".to_owned()];
        let results = run_ql_queries(
            &Executor::new(),
            work.path(),
            &queries,
            "pkg",
            out.path(),
            "definitely-not-codeql-xyz",
            Duration::from_secs(5),
        );
        assert_eq!(results.len(), 2);
        assert!(results.iter().all(|r| r.error.is_some() && r.results_csv.is_none()));
        assert_eq!(fs::read_dir(out.path()).unwrap().count(), 0);
    }

    #[test]
    fn fake_engine_produces_named_csvs() {
        let tools = tempfile::tempdir().unwrap();
        let root = tempfile::tempdir().unwrap();
        let work = root.path().join("pkg");
        fs::create_dir(&work).unwrap();
        let out = tempfile::tempdir().unwrap();
        // records its invocations and writes a CSV for `bqrs decode`
        let engine = tools.path().join("fake-ql");
        fs::write(
            &engine,
            "#!/bin/sh\necho \"$1 $2\" >> \"$(dirname \"$0\")/calls.log\"\n\
             if [ \"$1\" = bqrs ]; then for a; do case $a in --output=*) printf 'col\\nrow\\n' > \"${a#--output=}\";; esac; done; fi\n",
        )
        .unwrap();
        fs::set_permissions(&engine, fs::Permissions::from_mode(0o755)).unwrap();
        let q1 = write_script(tools.path(), "FindThings.ql", "select 1");
        let q2 = write_script(tools.path(), "Other.ql", "select 2");
        let results = run_ql_queries(
            &Executor::new(),
            &work,
            &[q1.clone(), q2],
            "@scope/pkg",
            out.path(),
            &engine.to_string_lossy(),
            Duration::from_secs(10),
        );
        assert!(results.iter().all(|r| r.error.is_none()), "{results:?}");
        let csv = out.path().join("@scope-pkg__FindThings__results.csv");
        assert_eq!(results[0].results_csv.as_deref(), Some(csv.to_string_lossy().as_ref()));
        assert_eq!(fs::read_to_string(&csv).unwrap(), "col\nrow\n");
        let calls = fs::read_to_string(tools.path().join("calls.log")).unwrap();
        assert_eq!(calls.matches("database create").count(), 1);
        assert_eq!(calls.matches("query run").count(), 2);
    }
}
