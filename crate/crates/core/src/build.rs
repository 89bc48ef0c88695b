//! Requeue-on-error scheduling of build scripts.
//!
//! Scripts run in order. A failing script goes to the back of the queue so it
//! can be retried after scripts it may depend on. The queue is processed in
//! passes; a pass in which nothing succeeds ends the loop with `bailed` set,
//! which bounds the number of executions by `n * (n + 1)` for `n` scripts.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

/// One script execution, in the order it happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildStep {
    pub script: String,
    pub succeeded: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildQueue {
    /// Scripts that eventually succeeded, in order of success.
    pub succeeded: Vec<String>,
    /// Scripts that never succeeded, in queue order at the time of bailing.
    pub failed: Vec<String>,
    pub bailed: bool,
    pub steps: Vec<BuildStep>,
}

impl BuildQueue {
    /// Runs `selected` through `run`, which returns whether the script
    /// succeeded.
    pub fn run<S, F>(selected: &[S], mut run: F) -> Self
    where
        S: AsRef<str>,
        F: FnMut(&str) -> bool,
    {
        let mut queue: VecDeque<String> = VecDeque::new();
        for s in selected {
            if !queue.iter().any(|q| q == s.as_ref()) {
                queue.push_back(s.as_ref().into());
            }
        }
        let mut out = Self::default();

        while !queue.is_empty() {
            let mut progressed = false;
            for _ in 0..queue.len() {
                let script = queue.pop_front().expect("pass length bounded by queue length");
                let ok = run(&script);
                out.steps.push(BuildStep { script: script.clone(), succeeded: ok });
                if ok {
                    progressed = true;
                    out.succeeded.push(script);
                } else {
                    queue.push_back(script);
                }
            }
            if !progressed {
                out.bailed = true;
                out.failed = queue.into_iter().collect();
                break;
            }
        }
        out
    }

    pub fn execution_order(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.script.as_str()).collect()
    }
}
