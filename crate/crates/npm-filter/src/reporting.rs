//! Writing results documents.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use npm_filter_core::ResultsDocument;
use serde::Serialize;

/// A package name made safe for use in a file name: `/` (from scoped
/// names) becomes `-`.
pub fn file_stem(package: &str) -> String {
    let stem: String = package
        .chars()
        .map(|c| if c == '/' || c == '\\' || c.is_control() { '-' } else { c })
        .collect();
    match stem.as_str() {
        "" | "." | ".." => format!("_{stem}"),
        _ => stem,
    }
}

/// `<package>__results.json`
pub fn results_file_name(package: &str) -> String {
    format!("{}__results.json", file_stem(package))
}

/// Serializes `doc` with four-space indentation.
pub fn to_json_string(doc: &ResultsDocument) -> String {
    let mut buf = Vec::new();
    let fmt = serde_json::ser::PrettyFormatter::with_indent(b"    ");
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    doc.serialize(&mut ser).expect("results documents always serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Writes `<package>__results.json` into `output_dir`. Outside verbose mode
/// raw command output is left out.
pub fn write_results(
    doc: &ResultsDocument,
    package: &str,
    output_dir: &Path,
    verbose: bool,
) -> io::Result<PathBuf> {
    let mut doc = doc.clone();
    if !verbose {
        doc.strip_verbose();
    }
    fs::create_dir_all(output_dir)?;
    let path = output_dir.join(results_file_name(package));
    fs::write(&path, to_json_string(&doc))?;
    Ok(path)
}

/// Hands out distinct result names within one batch: a repeated name gets a
/// `-2`, `-3`, ... suffix.
#[derive(Debug, Default)]
pub struct NameReserver {
    taken: HashSet<String>,
}

impl NameReserver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reserve(&mut self, package: &str) -> String {
        let base = file_stem(package);
        let mut n = 1;
        loop {
            let candidate = if n == 1 { base.clone() } else { format!("{base}-{n}") };
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
            n += 1;
        }
    }
}
