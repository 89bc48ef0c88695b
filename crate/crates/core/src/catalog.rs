//! Known linters, coverage tools and test frameworks, and classification of
//! npm script command strings against them.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;

use crate::parsers::Framework;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToolKind {
    Linter,
    Coverage,
    Framework,
}

/// One catalog entry: the id reported in results and the command tokens
/// that identify it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tool {
    pub id: &'static str,
    pub kind: ToolKind,
    pub tokens: &'static [&'static str],
}

const fn tool(id: &'static str, kind: ToolKind, tokens: &'static [&'static str]) -> Tool {
    Tool { id, kind, tokens }
}

/// The fixed tool catalog.
pub struct ToolCatalog;

impl ToolCatalog {
    // `gulp-lint` has no token of its own; it is recognized as `gulp`
    // followed by a lint task (see `classify_command`).
    pub const LINTERS: &'static [Tool] = &[
        tool("eslint", ToolKind::Linter, &["eslint"]),
        tool("tslint", ToolKind::Linter, &["tslint"]),
        tool("xx", ToolKind::Linter, &["xx"]),
        tool("standard", ToolKind::Linter, &["standard"]),
        tool("prettier", ToolKind::Linter, &["prettier"]),
        tool("gulp-lint", ToolKind::Linter, &[]),
    ];

    pub const COVERAGE: &'static [Tool] = &[
        tool("istanbul", ToolKind::Coverage, &["istanbul", "nyc"]),
        tool("coveralls", ToolKind::Coverage, &["coveralls"]),
        tool("c8", ToolKind::Coverage, &["c8"]),
    ];

    pub const FRAMEWORKS: &'static [Tool] = &[
        tool("mocha", ToolKind::Framework, &["mocha", "_mocha"]),
        tool("jest", ToolKind::Framework, &["jest"]),
        tool("jasmine", ToolKind::Framework, &["jasmine"]),
        tool("tap", ToolKind::Framework, &["tap"]),
        tool("lab", ToolKind::Framework, &["lab"]),
        tool("ava", ToolKind::Framework, &["ava"]),
        tool("gulp", ToolKind::Framework, &["gulp"]),
    ];

    pub fn all() -> impl Iterator<Item = &'static Tool> {
        Self::LINTERS.iter().chain(Self::COVERAGE).chain(Self::FRAMEWORKS)
    }

    /// The catalog entry a single normalized token names, if any.
    pub fn lookup(token: &str) -> Option<&'static Tool> {
        Self::all().find(|t| t.tokens.contains(&token))
    }
}

/// What a script command runs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classification {
    pub linters: Vec<String>,
    pub coverage_tools: Vec<String>,
    pub frameworks: Vec<Framework>,
    /// Other scripts of the same manifest this command dispatches to.
    pub nested: Vec<String>,
}

impl Classification {
    pub fn is_empty(&self) -> bool {
        self.linters.is_empty()
            && self.coverage_tools.is_empty()
            && self.frameworks.is_empty()
            && self.nested.is_empty()
    }
}

/// Classifies `command` (the body of script `script_name`).
///
/// Tools are matched per shell word, after reducing a path such as
/// `./node_modules/.bin/jest` or `node_modules/mocha/bin/mocha.js` to its
/// file stem. Nested scripts are the names in `all_script_names` invoked via
/// `npm run`, `npm run-script`, `npm test`, `yarn run`, `yarn <name>`, or
/// the `npm-run-all` / `run-s` / `run-p` helpers.
pub fn classify_command<'a>(
    _script_name: &str,
    command: &str,
    all_script_names: impl IntoIterator<Item = &'a str> + Clone,
) -> Classification {
    let mut out = Classification::default();
    let is_script = |name: &str| all_script_names.clone().into_iter().any(|s| s == name);

    for segment in segments(command) {
        let words: Vec<String> = segment.iter().map(|w| tool_token(w)).collect();
        let mut i = 0;
        while i < words.len() {
            let word = words[i].as_str();
            if word == "gulp"
                && words.get(i + 1).is_some_and(|next| next.starts_with("lint"))
            {
                push_unique(&mut out.linters, "gulp-lint");
                i += 2;
                continue;
            }
            if let Some(tool) = ToolCatalog::lookup(word) {
                match tool.kind {
                    ToolKind::Linter => push_unique(&mut out.linters, tool.id),
                    ToolKind::Coverage => push_unique(&mut out.coverage_tools, tool.id),
                    ToolKind::Framework => {
                        let fw = tool.id.parse().expect("catalog frameworks have parsers");
                        if !out.frameworks.contains(&fw) {
                            out.frameworks.push(fw);
                        }
                    }
                }
            }
            i += 1;
        }
        for name in nested_invocations(&segment) {
            if is_script(name) {
                push_unique(&mut out.nested, name);
            }
        }
    }
    out
}

fn push_unique(list: &mut Vec<String>, item: &str) {
    if !list.iter().any(|s| s == item) {
        list.push(item.to_owned());
    }
}

/// Script names a single simple command hands off to.
fn nested_invocations(words: &[String]) -> Vec<&str> {
    let args = |from: usize| words[from..].iter().map(String::as_str).filter(|w| !w.starts_with('-'));
    let Some(program) = words.first().map(|w| tool_token(w)) else {
        return Vec::new();
    };
    match program.as_str() {
        "npm" => {
            let mut rest = args(1);
            match rest.next() {
                Some("run" | "run-script" | "rum" | "urn") => rest.next().into_iter().collect(),
                Some("test" | "t" | "tst") => ["test"].into(),
                Some("start") => ["start"].into(),
                _ => Vec::new(),
            }
        }
        "yarn" => {
            let mut rest = args(1);
            match rest.next() {
                Some("run") => rest.next().into_iter().collect(),
                Some(name) => [name].into(),
                None => Vec::new(),
            }
        }
        "npm-run-all" | "run-s" | "run-p" => args(1).collect(),
        _ => Vec::new(),
    }
}

/// Reduces a shell word to the name a tool would be invoked by.
fn tool_token(word: &str) -> String {
    let base = word.rsplit('/').next().unwrap_or(word);
    let base = [".js", ".cjs", ".mjs", ".cmd"]
        .iter()
        .find_map(|ext| base.strip_suffix(ext))
        .unwrap_or(base);
    base.to_owned()
}

/// Splits a shell command into simple commands, each a list of words with
/// quotes removed. Operators `&&`, `||`, `;`, `|`, `&` and parentheses end
/// a simple command. Leading `VAR=value` assignments and `npx` / `cross-env`
/// style launchers are dropped so the launched program comes first.
fn segments(command: &str) -> Vec<Vec<String>> {
    let mut segments = Vec::new();
    let mut words: Vec<String> = Vec::new();
    let mut word = String::new();
    let mut in_word = false;
    let mut quote: Option<char> = None;
    let mut chars = command.chars().peekable();

    let end_word = |words: &mut Vec<String>, word: &mut String, in_word: &mut bool| {
        if *in_word {
            words.push(core::mem::take(word));
            *in_word = false;
        }
    };

    while let Some(c) = chars.next() {
        if let Some(q) = quote {
            if c == q {
                quote = None;
            } else if c == '\\' && q == '"' {
                if let Some(n) = chars.next() {
                    word.push(n);
                }
            } else {
                word.push(c);
            }
            continue;
        }
        match c {
            '\'' | '"' => {
                quote = Some(c);
                in_word = true;
            }
            '\\' => {
                if let Some(n) = chars.next() {
                    word.push(n);
                    in_word = true;
                }
            }
            c if c.is_whitespace() => end_word(&mut words, &mut word, &mut in_word),
            '&' | '|' | ';' | '(' | ')' => {
                end_word(&mut words, &mut word, &mut in_word);
                if !words.is_empty() {
                    segments.push(core::mem::take(&mut words));
                }
            }
            _ => {
                word.push(c);
                in_word = true;
            }
        }
    }
    end_word(&mut words, &mut word, &mut in_word);
    if !words.is_empty() {
        segments.push(words);
    }

    for seg in &mut segments {
        strip_launchers(seg);
    }
    segments.retain(|s| !s.is_empty());
    segments
}

fn strip_launchers(words: &mut Vec<String>) {
    loop {
        let Some(first) = words.first() else { return };
        let is_assignment = first
            .split_once('=')
            .is_some_and(|(k, _)| !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'));
        let is_launcher = matches!(
            tool_token(first).as_str(),
            "npx" | "cross-env" | "env" | "exec" | "time" | "nice" | "node" | "pnpx"
        );
        if is_assignment || is_launcher || (first.starts_with('-') && words.len() > 1) {
            words.remove(0);
        } else {
            return;
        }
    }
}
