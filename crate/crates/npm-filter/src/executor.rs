//! Running shell commands with a hard timeout.
//!
//! Each command runs as `sh -c <command>` in a fresh process group. On
//! timeout the whole group is killed, and after a normal exit any
//! stragglers left in the group (background servers, watchers) are killed
//! too, so no process outlives the call.

use std::io::{self, Read};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use npm_filter_core::ExecutionOutcome;

/// How long output readers may keep going after the process group is gone.
/// Only matters when something escaped the group but still holds a pipe.
const READER_GRACE: Duration = Duration::from_millis(1000);

const POLL_INTERVAL: Duration = Duration::from_millis(10);

/// Runs commands with a fixed set of extra environment variables.
///
/// `CI=true` is always set so that test runners skip watch mode and
/// interactive output.
#[derive(Debug, Clone, Default)]
pub struct Executor {
    env: Vec<(String, String)>,
}

impl Executor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds (or overrides) an environment variable for every command.
    pub fn with_env(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        let key = key.into();
        self.env.retain(|(k, _)| *k != key);
        self.env.push((key, value.into()));
        self
    }

    /// Runs `command` through the shell in `cwd`.
    ///
    /// Only environmental problems (missing `cwd`, no shell) are errors; a
    /// failing or hanging command is described by the returned outcome.
    pub fn run(&self, command: &str, cwd: &Path, timeout: Duration) -> io::Result<ExecutionOutcome> {
        if !cwd.is_dir() {
            return Err(io::Error::new(
                io::ErrorKind::NotFound,
                format!("working directory {} does not exist", cwd.display()),
            ));
        }
        let start = Instant::now();
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(command)
            .current_dir(cwd)
            .env("CI", "true")
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0);
        for (k, v) in &self.env {
            cmd.env(k, v);
        }
        let mut child = cmd.spawn()?;
        let pgid = child.id() as libc::pid_t;

        let stdout = Capture::start(child.stdout.take());
        let stderr = Capture::start(child.stderr.take());

        let exited = wait_without_reaping(&mut child, start + timeout);
        // The leader is still a zombie here, so its id cannot have been
        // reused and the group is exactly the one we created.
        kill_group(pgid);
        let status = child.wait()?;
        let duration = start.elapsed();

        let reader_deadline = Instant::now() + READER_GRACE;
        let stdout = stdout.finish(reader_deadline);
        let stderr = stderr.finish(reader_deadline);

        let timed_out = !exited?;
        Ok(ExecutionOutcome {
            command: command.to_owned(),
            stdout,
            stderr,
            exit_status: if timed_out { None } else { Some(exit_code(status)) },
            timed_out,
            duration_ms: duration.as_millis() as u64,
        })
    }
}

/// Runs `command` with the default [`Executor`].
pub fn run_command(command: &str, cwd: &Path, timeout: Duration) -> io::Result<ExecutionOutcome> {
    Executor::new().run(command, cwd, timeout)
}

fn exit_code(status: ExitStatus) -> i32 {
    status.code().or_else(|| status.signal().map(|s| 128 + s)).unwrap_or(-1)
}

fn kill_group(pgid: libc::pid_t) {
    // SAFETY: killpg has no memory-safety preconditions. ESRCH (group
    // already empty) is the common case and is ignored.
    unsafe {
        libc::killpg(pgid, libc::SIGKILL);
    }
}

/// Waits until the child exits or `deadline` passes, leaving the child
/// unreaped. Returns whether it exited.
fn wait_without_reaping(child: &mut Child, deadline: Instant) -> io::Result<bool> {
    let pid = child.id() as libc::id_t;
    loop {
        // SAFETY: `info` is a plain C struct that waitid fills in.
        let mut info: libc::siginfo_t = unsafe { std::mem::zeroed() };
        let rc = unsafe {
            libc::waitid(
                libc::P_PID,
                pid,
                &mut info,
                libc::WEXITED | libc::WNOHANG | libc::WNOWAIT,
            )
        };
        if rc == -1 {
            let err = io::Error::last_os_error();
            if err.kind() == io::ErrorKind::Interrupted {
                continue;
            }
            return Err(err);
        }
        // With WNOHANG, si_pid stays 0 while the child is still running.
        if unsafe { info.si_pid() } != 0 {
            return Ok(true);
        }
        let now = Instant::now();
        if now >= deadline {
            return Ok(false);
        }
        thread::sleep(POLL_INTERVAL.min(deadline - now));
    }
}

/// A pipe drained on a background thread into a shared buffer, so whatever
/// arrived can be collected even if the writer never closes its end.
struct Capture {
    buf: Arc<Mutex<Vec<u8>>>,
    handle: Option<thread::JoinHandle<()>>,
}

impl Capture {
    fn start<R: Read + Send + 'static>(pipe: Option<R>) -> Self {
        let buf = Arc::new(Mutex::new(Vec::new()));
        let handle = pipe.map(|mut pipe| {
            let buf = Arc::clone(&buf);
            thread::spawn(move || {
                let mut chunk = [0u8; 8192];
                loop {
                    match pipe.read(&mut chunk) {
                        Ok(0) => break,
                        Ok(n) => buf.lock().unwrap().extend_from_slice(&chunk[..n]),
                        Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                        Err(_) => break,
                    }
                }
            })
        });
        Self { buf, handle }
    }

    fn finish(mut self, deadline: Instant) -> String {
        if let Some(handle) = self.handle.take() {
            while !handle.is_finished() && Instant::now() < deadline {
                thread::sleep(POLL_INTERVAL);
            }
            if handle.is_finished() {
                let _ = handle.join();
            }
        }
        let bytes = std::mem::take(&mut *self.buf.lock().unwrap());
        String::from_utf8_lossy(&bytes).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn echo() {
        let dir = tmp();
        let out = run_command("echo hi", dir.path(), Duration::from_secs(10)).unwrap();
        assert_eq!(out.stdout, "hi\n");
        assert_eq!(out.exit_status, Some(0));
        assert!(!out.timed_out);
        assert!(out.succeeded());
    }

    #[test]
    fn timeout_kills_and_reports() {
        let dir = tmp();
        let out = run_command("sleep 10", dir.path(), Duration::from_millis(1000)).unwrap();
        assert!(out.timed_out);
        assert_eq!(out.exit_status, None);
        assert!((1000..2000).contains(&out.duration_ms), "{}", out.duration_ms);
    }

    #[test]
    fn missing_command_is_data() {
        let dir = tmp();
        let out =
            run_command("definitely-not-a-command-xyz", dir.path(), Duration::from_secs(10)).unwrap();
        assert_eq!(out.exit_status, Some(127));
        assert!(out.stderr.contains("not found"), "{}", out.stderr);
    }

    #[test]
    fn large_output_is_not_truncated() {
        let dir = tmp();
        let out = run_command(
            "i=0; while [ $i -lt 1000 ]; do printf '%0100d' 0; i=$((i+1)); done",
            dir.path(),
            Duration::from_secs(30),
        )
        .unwrap();
        assert_eq!(out.stdout.len(), 100_000);
    }

    #[test]
    fn both_streams_and_env() {
        let dir = tmp();
        let exec = Executor::new().with_env("GREETING", "hey");
        let out = exec
            .run("echo $GREETING; echo $CI >&2; exit 3", dir.path(), Duration::from_secs(10))
            .unwrap();
        assert_eq!(out.stdout, "hey\n");
        assert_eq!(out.stderr, "true\n");
        assert_eq!(out.exit_status, Some(3));
        assert_eq!(out.combined_output(), "hey\n\ntrue\n");
    }

    #[test]
    fn background_children_do_not_hold_the_call() {
        let dir = tmp();
        let start = Instant::now();
        let out = run_command("sleep 20 & echo started", dir.path(), Duration::from_secs(10)).unwrap();
        assert_eq!(out.stdout, "started\n");
        assert!(start.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn missing_cwd_is_an_error() {
        let err = run_command("true", Path::new("/no/such/dir/here"), Duration::from_secs(1));
        assert_eq!(err.unwrap_err().kind(), io::ErrorKind::NotFound);
    }
}
