//! `package.json` scripts and selection of the ones worth running.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::de::IgnoredAny;
use serde::Deserialize;

use crate::ordered_map::OrderedMap;

/// The `scripts` section of a manifest, in the order it was written.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ManifestScripts {
    entries: OrderedMap<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestError(pub String);

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "malformed package.json: {}", self.0)
    }
}

impl core::error::Error for ManifestError {}

#[derive(Deserialize)]
struct RawManifest {
    #[serde(default)]
    scripts: Option<RawScripts>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScripts {
    Map(OrderedMap<serde_json::Value>),
    Other(IgnoredAny),
}

impl ManifestScripts {
    /// Reads the scripts of a `package.json` document. A missing or
    /// non-object `scripts` entry gives an empty set; script bodies that are
    /// not strings are skipped.
    pub fn from_json_str(text: &str) -> Result<Self, ManifestError> {
        // serde would also accept a JSON array as the struct
        if !text.trim_start().starts_with('{') {
            return Err(ManifestError("top level is not an object".to_owned()));
        }
        let raw: RawManifest =
            serde_json::from_str(text).map_err(|e| ManifestError(e.to_string()))?;
        let entries = match raw.scripts {
            Some(RawScripts::Map(map)) => map
                .iter()
                .filter_map(|(name, body)| Some((name, body.as_str()?.to_owned())))
                .collect(),
            Some(RawScripts::Other(_)) | None => OrderedMap::new(),
        };
        Ok(Self { entries })
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(String::as_str)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + Clone {
        self.entries.keys().collect::<Vec<_>>().into_iter()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k, v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for ManifestScripts {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self { entries: iter.into_iter().map(|(k, v)| (k, v.into())).collect() }
    }
}

/// Script names to run, in manifest order.
///
/// A script is selected when its name contains one of `tracked`, its name is
/// not listed in `ignored_commands`, and its command string contains none of
/// `ignored_substrings`. Matching is case-sensitive.
pub fn select_commands<S: AsRef<str>>(
    scripts: &ManifestScripts,
    tracked: &[S],
    ignored_commands: &[S],
    ignored_substrings: &[S],
) -> Vec<String> {
    scripts
        .iter()
        .filter(|(name, _)| tracked.iter().any(|t| name.contains(t.as_ref())))
        .filter(|(name, _)| !ignored_commands.iter().any(|i| i.as_ref() == *name))
        .filter(|(_, body)| !ignored_substrings.iter().any(|i| body.contains(i.as_ref())))
        .map(|(name, _)| name.to_owned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DEFAULT_TRACKED_BUILD_COMMANDS, DEFAULT_TRACKED_TEST_COMMANDS};

    const NONE: &[&str] = &[];

    #[test]
    fn reads_scripts_in_order() {
        let m = ManifestScripts::from_json_str(r#"{"name":"x","scripts":{"build":"tsc","test":"jest"}}"#)
            .unwrap();
        assert_eq!(m.iter().collect::<Vec<_>>(), [("build", "tsc"), ("test", "jest")]);
    }

    #[test]
    fn missing_or_odd_scripts_section() {
        assert!(ManifestScripts::from_json_str(r#"{"name":"x"}"#).unwrap().is_empty());
        assert!(ManifestScripts::from_json_str(r#"{"scripts":null}"#).unwrap().is_empty());
        assert!(ManifestScripts::from_json_str(r#"{"scripts":"nope"}"#).unwrap().is_empty());
        let m = ManifestScripts::from_json_str(r#"{"scripts":{"a":1,"b":"ok"}}"#).unwrap();
        assert_eq!(m.names().collect::<Vec<_>>(), ["b"]);
    }

    #[test]
    fn malformed_manifest() {
        assert!(ManifestScripts::from_json_str("{").is_err());
        assert!(ManifestScripts::from_json_str("[]").is_err());
    }

    #[test]
    fn build_selection() {
        let m: ManifestScripts = [("build", "tsc")].into_iter().collect();
        assert_eq!(select_commands(&m, &DEFAULT_TRACKED_BUILD_COMMANDS, NONE, NONE), ["build"]);
        let empty = ManifestScripts::default();
        assert!(select_commands(&empty, &DEFAULT_TRACKED_BUILD_COMMANDS, NONE, NONE).is_empty());
    }

    #[test]
    fn test_selection_with_ignores() {
        let m: ManifestScripts =
            [("test:unit", "mocha"), ("pretest", "eslint .")].into_iter().collect();
        assert_eq!(
            select_commands(&m, &DEFAULT_TRACKED_TEST_COMMANDS, NONE, NONE),
            ["test:unit", "pretest"]
        );
        assert_eq!(
            select_commands(&m, &DEFAULT_TRACKED_TEST_COMMANDS, NONE, &["eslint"]),
            ["test:unit"]
        );
        assert_eq!(
            select_commands(&m, &DEFAULT_TRACKED_TEST_COMMANDS, &["pretest"], NONE),
            ["test:unit"]
        );
    }

    #[test]
    fn no_duplicates_when_several_substrings_match() {
        let m: ManifestScripts = [("test:unit:ci", "jest")].into_iter().collect();
        assert_eq!(select_commands(&m, &["test", "unit", "ci"], NONE, NONE), ["test:unit:ci"]);
    }
}
