//! Summary-line parsers for JavaScript test runners.
//!
//! Each runner prints a summary at the end of a run. The grammars below were
//! fitted to real runner output; the fixture corpus under
//! `tests/fixtures/parsers/` is the reference for every one of them.
//!
//! | runner  | summary                                                           |
//! |---------|-------------------------------------------------------------------|
//! | mocha   | `N passing (…)` / `M failing`                                     |
//! | jest    | `Tests: X failed, Y passed, Z total` (clauses optional)           |
//! | jasmine | `N specs, M failures[, K pending specs]`                          |
//! | tap     | `# { total: T, pass: P, fail: F }`, `# pass N` / `# fail M`, or `ok`/`not ok` lines |
//! | ava     | `N tests passed` / `M tests failed`, `✔` lines when no passed line |
//! | lab     | `N tests complete` / `F of N tests failed`                        |
//! | gulp    | whatever runner it wraps                                          |
//!
//! When a summary appears more than once (watch reruns, wrappers that run
//! the suite twice) the last one wins. ANSI escapes are removed first.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// A test runner whose output can be parsed for pass/fail counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    Mocha,
    Jest,
    Jasmine,
    Tap,
    Lab,
    Ava,
    Gulp,
}

impl Framework {
    pub const ALL: [Framework; 7] = [
        Framework::Mocha,
        Framework::Jest,
        Framework::Jasmine,
        Framework::Tap,
        Framework::Lab,
        Framework::Ava,
        Framework::Gulp,
    ];

    /// Frameworks with a grammar of their own, in the order output is
    /// sniffed. Tap goes last because its `ok` line fallback is the loosest.
    const DIRECT: [Framework; 6] = [
        Framework::Mocha,
        Framework::Jest,
        Framework::Jasmine,
        Framework::Ava,
        Framework::Lab,
        Framework::Tap,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Framework::Mocha => "mocha",
            Framework::Jest => "jest",
            Framework::Jasmine => "jasmine",
            Framework::Tap => "tap",
            Framework::Lab => "lab",
            Framework::Ava => "ava",
            Framework::Gulp => "gulp",
        }
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Framework {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Framework::ALL.into_iter().find(|fw| fw.id() == s).ok_or(())
    }
}

/// Counts extracted from one command's output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParsedCounts {
    pub passing: u64,
    pub failing: u64,
    /// False when no summary for the framework was found; counts are then 0.
    pub recognized: bool,
}

impl ParsedCounts {
    fn found(passing: u64, failing: u64) -> Self {
        Self { passing, failing, recognized: true }
    }

    pub fn total(&self) -> u64 {
        self.passing + self.failing
    }
}

/// Parses `output` with the grammar for `framework`.
pub fn parse_framework_output(framework: Framework, output: &str) -> ParsedCounts {
    let text = strip_ansi(output);
    parse_clean(framework, &text)
}

/// Frameworks whose summary grammar recognizes `output`, for commands that
/// name no known runner (custom `node run-tests.js` wrappers and the like).
pub fn sniff_frameworks(output: &str) -> Vec<Framework> {
    let text = strip_ansi(output);
    Framework::DIRECT
        .into_iter()
        .filter(|fw| parse_clean(*fw, &text).recognized)
        .collect()
}

fn parse_clean(framework: Framework, text: &str) -> ParsedCounts {
    let parsed = match framework {
        Framework::Mocha => parse_mocha(text),
        Framework::Jest => parse_jest(text),
        Framework::Jasmine => parse_jasmine(text),
        Framework::Tap => parse_tap(text),
        Framework::Lab => parse_lab(text),
        Framework::Ava => parse_ava(text),
        Framework::Gulp => Framework::DIRECT
            .into_iter()
            .map(|fw| parse_clean(fw, text))
            .find(|c| c.recognized),
    };
    parsed.unwrap_or_default()
}

/// Removes ANSI CSI and OSC escape sequences.
pub fn strip_ansi(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut chars = input.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\u{1b}' {
            out.push(c);
            continue;
        }
        match chars.peek() {
            Some('[') => {
                chars.next();
                // parameters and intermediates, then one final byte in @..~
                for c in chars.by_ref() {
                    if ('@'..='~').contains(&c) {
                        break;
                    }
                }
            }
            Some(']') => {
                chars.next();
                // terminated by BEL or ESC \
                while let Some(c) = chars.next() {
                    if c == '\u{7}' {
                        break;
                    }
                    if c == '\u{1b}' && chars.peek() == Some(&'\\') {
                        chars.next();
                        break;
                    }
                }
            }
            Some(_) => {
                chars.next();
            }
            None => {}
        }
    }
    out
}

/// Splits `s` into a leading unsigned integer and the rest.
fn leading_number(s: &str) -> Option<(u64, &str)> {
    let end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    if end == 0 {
        return None;
    }
    Some((s[..end].parse().ok()?, &s[end..]))
}

/// Matches `<N> <word>` at the start of `s`, where the word is followed by
/// the end of input or a non-alphanumeric character.
fn count_then_word(s: &str, words: &[&str]) -> Option<u64> {
    let (n, rest) = leading_number(s)?;
    let rest = rest.strip_prefix(' ')?;
    words.iter().find_map(|w| {
        let after = rest.strip_prefix(w)?;
        match after.chars().next() {
            Some(c) if c.is_alphanumeric() => None,
            _ => Some(n),
        }
    })
}

fn parse_mocha(text: &str) -> Option<ParsedCounts> {
    let mut last = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(n) = count_then_word(line, &["passing"]) {
            last = Some(ParsedCounts::found(n, 0));
        } else if let Some(n) = count_then_word(line, &["failing"]) {
            let block = last.get_or_insert(ParsedCounts::found(0, 0));
            block.failing = n;
        }
    }
    last
}

fn parse_jest(text: &str) -> Option<ParsedCounts> {
    let line = text.lines().rev().find_map(|l| l.trim_start().strip_prefix("Tests:"))?;
    let mut counts = ParsedCounts::found(0, 0);
    let mut any = false;
    for clause in line.split(',') {
        let clause = clause.trim();
        if let Some(n) = count_then_word(clause, &["passed"]) {
            counts.passing = n;
            any = true;
        } else if let Some(n) = count_then_word(clause, &["failed"]) {
            counts.failing = n;
            any = true;
        } else if count_then_word(clause, &["total", "skipped", "todo", "pending"]).is_some() {
            any = true;
        }
    }
    any.then_some(counts)
}

fn parse_jasmine(text: &str) -> Option<ParsedCounts> {
    text.lines().rev().find_map(|line| {
        let mut clauses = line.trim().split(", ");
        let specs = count_then_word(clauses.next()?, &["specs", "spec"])?;
        let failures = count_then_word(clauses.next()?, &["failures", "failure"])?;
        let pending = clauses
            .next()
            .and_then(|c| count_then_word(c, &["pending"]))
            .unwrap_or(0);
        Some(ParsedCounts::found(specs.saturating_sub(failures + pending), failures))
    })
}

fn parse_tap(text: &str) -> Option<ParsedCounts> {
    let mut summary: Option<ParsedCounts> = None;
    for line in text.lines() {
        let line = line.trim_end();
        if let Some(body) = line.strip_prefix("# {").and_then(|b| b.strip_suffix('}')) {
            // `# { total: 4, pass: 3, fail: 1 }`; absent keys are zero
            let mut counts = ParsedCounts::found(0, 0);
            let mut any = false;
            for field in body.split(',') {
                let Some((key, value)) = field.split_once(':') else { continue };
                let Ok(n) = value.trim().parse::<u64>() else { continue };
                match key.trim() {
                    "pass" => counts.passing = n,
                    "fail" => counts.failing = n,
                    "total" => {}
                    _ => continue,
                }
                any = true;
            }
            if any {
                summary = Some(counts);
            }
        } else if let Some(n) = line.strip_prefix("# pass").and_then(spaced_number) {
            summary = Some(ParsedCounts::found(n, 0));
        } else if let Some(n) = line.strip_prefix("# fail").and_then(spaced_number) {
            summary.get_or_insert(ParsedCounts::found(0, 0)).failing = n;
        }
    }
    if summary.is_some() {
        return summary;
    }

    // No summary block: count top-level test points.
    let mut counts = ParsedCounts::found(0, 0);
    let mut seen = false;
    for line in text.lines() {
        if line.strip_prefix("not ok").is_some_and(test_point_rest) {
            counts.failing += 1;
            seen = true;
        } else if line.strip_prefix("ok").is_some_and(test_point_rest) {
            counts.passing += 1;
            seen = true;
        }
    }
    seen.then_some(counts)
}

/// `" 12"` → 12, with at least one space and nothing after the digits.
fn spaced_number(s: &str) -> Option<u64> {
    let trimmed = s.trim_start();
    if trimmed.len() == s.len() {
        return None;
    }
    let (n, rest) = leading_number(trimmed)?;
    rest.trim().is_empty().then_some(n)
}

/// What may follow `ok` / `not ok` on a test point line.
fn test_point_rest(rest: &str) -> bool {
    rest.is_empty() || rest.starts_with(' ')
}

fn parse_ava(text: &str) -> Option<ParsedCounts> {
    let mut ticks = 0u64;
    let mut in_summary = false;
    let mut block: Option<(Option<u64>, Option<u64>, u64)> = None;
    let mut last = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(n) = count_then_word(line, &["tests passed", "test passed"]) {
            let b = open_block(&mut block, &mut in_summary, ticks);
            b.0 = Some(n);
        } else if let Some(n) = count_then_word(line, &["tests failed", "test failed"]) {
            let b = open_block(&mut block, &mut in_summary, ticks);
            b.1 = Some(n);
        } else if line.starts_with('\u{2714}') {
            if in_summary {
                // a new run started after a summary
                last = block.take();
                in_summary = false;
                ticks = 0;
            }
            ticks += 1;
        }
    }
    if block.is_some() {
        last = block;
    }
    last.map(|(passed, failed, ticks)| {
        ParsedCounts::found(passed.unwrap_or(ticks), failed.unwrap_or(0))
    })
}

fn open_block<'a>(
    block: &'a mut Option<(Option<u64>, Option<u64>, u64)>,
    in_summary: &mut bool,
    ticks: u64,
) -> &'a mut (Option<u64>, Option<u64>, u64) {
    if !*in_summary {
        *block = None;
        *in_summary = true;
    }
    block.get_or_insert((None, None, ticks))
}

fn parse_lab(text: &str) -> Option<ParsedCounts> {
    text.lines().rev().find_map(|line| {
        let line = line.trim();
        if let Some(total) = count_then_word(line, &["tests complete", "test complete"]) {
            return Some(ParsedCounts::found(total, 0));
        }
        let (failed, rest) = leading_number(line)?;
        let rest = rest.strip_prefix(" of ")?;
        let total = count_then_word(rest, &["tests failed", "test failed"])?;
        Some(ParsedCounts::found(total.saturating_sub(failed), failed))
    })
}
