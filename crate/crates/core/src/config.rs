//! Analysis configuration.
//!
//! The configuration file is a JSON object grouped by phase:
//!
//! ```json
//! {
//!   "install":      { "timeout": 600000 },
//!   "dependencies": { "track_deps": false, "include_dev_deps": false, "timeout": 300000 },
//!   "build":        { "track_build": true, "tracked_build_commands": ["build", "compile", "init"], "timeout": 300000 },
//!   "test":         { "track_tests": true, "tracked_test_commands": ["test", "..."], "timeout": 600000 },
//!   "meta_info": {
//!     "VERBOSE_MODE": false,
//!     "ignored_commands": [],
//!     "ignored_substrings": [],
//!     "rm_after_cloning": false,
//!     "scripts_over_code": [],
//!     "QL_queries": [],
//!     "QL_engine": "codeql"
//!   }
//! }
//! ```
//!
//! Every section and every key is optional. Present keys replace the default
//! value wholesale (lists are not merged). Unknown keys produce a
//! [`ConfigWarning`] and are otherwise ignored. Timeouts are milliseconds.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::time::Duration;

use serde_json::{Map, Value};

pub const DEFAULT_TRACKED_BUILD_COMMANDS: [&str; 3] = ["build", "compile", "init"];

pub const DEFAULT_TRACKED_TEST_COMMANDS: [&str; 14] = [
    "test",
    "unit",
    "cov",
    "ci",
    "integration",
    "lint",
    "travis",
    "e2e",
    "bench",
    "mocha",
    "jest",
    "ava",
    "tap",
    "jasmine",
];

pub const DEFAULT_INSTALL_TIMEOUT: Duration = Duration::from_millis(600_000);
pub const DEFAULT_DEPS_TIMEOUT: Duration = Duration::from_millis(300_000);
pub const DEFAULT_BUILD_TIMEOUT: Duration = Duration::from_millis(300_000);
pub const DEFAULT_TEST_TIMEOUT: Duration = Duration::from_millis(600_000);

/// Executable used for static-analysis queries.
pub const DEFAULT_QL_ENGINE: &str = "codeql";

/// Every tunable of one analysis run. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub install_timeout: Duration,

    pub track_deps: bool,
    pub include_dev_deps: bool,
    pub deps_timeout: Duration,

    pub track_build: bool,
    pub tracked_build_commands: Vec<String>,
    /// Per build command.
    pub build_timeout: Duration,

    pub track_tests: bool,
    pub tracked_test_commands: Vec<String>,
    /// Per test command. Also used for custom scripts and queries.
    pub test_timeout: Duration,

    pub verbose_mode: bool,
    /// Script names that are never run.
    pub ignored_commands: Vec<String>,
    /// Scripts whose command string contains one of these are never run.
    pub ignored_substrings: Vec<String>,
    pub rm_after_cloning: bool,
    pub scripts_over_code: Vec<String>,
    pub ql_queries: Vec<String>,
    pub ql_engine: String,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            install_timeout: DEFAULT_INSTALL_TIMEOUT,
            track_deps: false,
            include_dev_deps: false,
            deps_timeout: DEFAULT_DEPS_TIMEOUT,
            track_build: true,
            tracked_build_commands: owned(&DEFAULT_TRACKED_BUILD_COMMANDS),
            build_timeout: DEFAULT_BUILD_TIMEOUT,
            track_tests: true,
            tracked_test_commands: owned(&DEFAULT_TRACKED_TEST_COMMANDS),
            test_timeout: DEFAULT_TEST_TIMEOUT,
            verbose_mode: false,
            ignored_commands: Vec::new(),
            ignored_substrings: Vec::new(),
            rm_after_cloning: false,
            scripts_over_code: Vec::new(),
            ql_queries: Vec::new(),
            ql_engine: DEFAULT_QL_ENGINE.to_owned(),
        }
    }
}

fn owned(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    /// The text is not JSON, or the top level is not an object.
    Malformed(String),
    WrongType { key: String, expected: &'static str },
    NonPositiveTimeout { key: String },
    EmptySubstring { key: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Malformed(msg) => write!(f, "malformed configuration: {msg}"),
            ConfigError::WrongType { key, expected } => {
                write!(f, "configuration key `{key}` must be {expected}")
            }
            ConfigError::NonPositiveTimeout { key } => {
                write!(f, "configuration key `{key}` must be a positive number of milliseconds")
            }
            ConfigError::EmptySubstring { key } => {
                write!(f, "configuration key `{key}` contains an empty string")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// A non-fatal problem found while loading a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigWarning {
    UnknownKey(String),
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::UnknownKey(key) => write!(f, "ignoring unknown configuration key `{key}`"),
        }
    }
}

const SECTION_KEYS: &[(&str, &[&str])] = &[
    ("install", &["timeout"]),
    ("dependencies", &["track_deps", "include_dev_deps", "timeout"]),
    ("build", &["track_build", "tracked_build_commands", "timeout"]),
    ("test", &["track_tests", "tracked_test_commands", "timeout"]),
    (
        "meta_info",
        &[
            "VERBOSE_MODE",
            "ignored_commands",
            "ignored_substrings",
            "rm_after_cloning",
            "scripts_over_code",
            "QL_queries",
            "QL_engine",
        ],
    ),
];

impl AnalysisConfig {
    /// Parses a configuration file's text and overlays it on the defaults.
    pub fn from_json_str(text: &str) -> Result<(Self, Vec<ConfigWarning>), ConfigError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        let mut config = Self::default();
        let warnings = config.overlay(&value)?;
        Ok((config, warnings))
    }

    /// Applies the fields present in `value` over `self`.
    ///
    /// On error `self` may be partially updated; callers discard it.
    pub fn overlay(&mut self, value: &Value) -> Result<Vec<ConfigWarning>, ConfigError> {
        let root = value
            .as_object()
            .ok_or_else(|| ConfigError::Malformed("top level must be a JSON object".to_owned()))?;
        let mut warnings = Vec::new();

        for (section_name, section) in root {
            let Some((_, known)) = SECTION_KEYS.iter().find(|(name, _)| name == section_name)
            else {
                warnings.push(ConfigWarning::UnknownKey(section_name.clone()));
                continue;
            };
            let section = section.as_object().ok_or_else(|| ConfigError::WrongType {
                key: section_name.clone(),
                expected: "an object",
            })?;
            for key in section.keys() {
                if !known.contains(&key.as_str()) {
                    warnings.push(ConfigWarning::UnknownKey(format!("{section_name}.{key}")));
                }
            }
            let s = Section { name: section_name, fields: section };
            match section_name.as_str() {
                "install" => {
                    s.timeout("timeout", &mut self.install_timeout)?;
                }
                "dependencies" => {
                    s.boolean("track_deps", &mut self.track_deps)?;
                    s.boolean("include_dev_deps", &mut self.include_dev_deps)?;
                    s.timeout("timeout", &mut self.deps_timeout)?;
                }
                "build" => {
                    s.boolean("track_build", &mut self.track_build)?;
                    s.substrings("tracked_build_commands", &mut self.tracked_build_commands)?;
                    s.timeout("timeout", &mut self.build_timeout)?;
                }
                "test" => {
                    s.boolean("track_tests", &mut self.track_tests)?;
                    s.substrings("tracked_test_commands", &mut self.tracked_test_commands)?;
                    s.timeout("timeout", &mut self.test_timeout)?;
                }
                "meta_info" => {
                    s.boolean("VERBOSE_MODE", &mut self.verbose_mode)?;
                    s.substrings("ignored_commands", &mut self.ignored_commands)?;
                    s.substrings("ignored_substrings", &mut self.ignored_substrings)?;
                    s.boolean("rm_after_cloning", &mut self.rm_after_cloning)?;
                    s.strings("scripts_over_code", &mut self.scripts_over_code)?;
                    s.strings("QL_queries", &mut self.ql_queries)?;
                    s.string("QL_engine", &mut self.ql_engine)?;
                }
                _ => unreachable!("section list and match arms disagree"),
            }
        }
        Ok(warnings)
    }

    /// The configuration in file form. Loading this value yields `self`.
    pub fn to_json(&self) -> Value {
        let ms = |d: Duration| Value::from(d.as_millis() as u64);
        let list = |items: &[String]| Value::from(items.to_vec());
        let mut root = Map::new();
        root.insert("install".into(), object(vec![("timeout", ms(self.install_timeout))]));
        root.insert(
            "dependencies".into(),
            object(vec![
                ("track_deps", self.track_deps.into()),
                ("include_dev_deps", self.include_dev_deps.into()),
                ("timeout", ms(self.deps_timeout)),
            ]),
        );
        root.insert(
            "build".into(),
            object(vec![
                ("track_build", self.track_build.into()),
                ("tracked_build_commands", list(&self.tracked_build_commands)),
                ("timeout", ms(self.build_timeout)),
            ]),
        );
        root.insert(
            "test".into(),
            object(vec![
                ("track_tests", self.track_tests.into()),
                ("tracked_test_commands", list(&self.tracked_test_commands)),
                ("timeout", ms(self.test_timeout)),
            ]),
        );
        root.insert(
            "meta_info".into(),
            object(vec![
                ("VERBOSE_MODE", self.verbose_mode.into()),
                ("ignored_commands", list(&self.ignored_commands)),
                ("ignored_substrings", list(&self.ignored_substrings)),
                ("rm_after_cloning", self.rm_after_cloning.into()),
                ("scripts_over_code", list(&self.scripts_over_code)),
                ("QL_queries", list(&self.ql_queries)),
                ("QL_engine", self.ql_engine.clone().into()),
            ]),
        );
        Value::Object(root)
    }
}

fn object(fields: Vec<(&str, Value)>) -> Value {
    Value::Object(fields.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())
}

struct Section<'a> {
    name: &'a str,
    fields: &'a Map<String, Value>,
}

impl Section<'_> {
    fn key(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn boolean(&self, key: &str, slot: &mut bool) -> Result<(), ConfigError> {
        if let Some(v) = self.fields.get(key) {
            *slot = v.as_bool().ok_or_else(|| ConfigError::WrongType {
                key: self.key(key),
                expected: "a boolean",
            })?;
        }
        Ok(())
    }

    fn timeout(&self, key: &str, slot: &mut Duration) -> Result<(), ConfigError> {
        let Some(v) = self.fields.get(key) else {
            return Ok(());
        };
        let Some(n) = v.as_f64() else {
            return Err(ConfigError::WrongType { key: self.key(key), expected: "a number" });
        };
        if n <= 0.0 {
            return Err(ConfigError::NonPositiveTimeout { key: self.key(key) });
        }
        let ms = v.as_u64().ok_or_else(|| ConfigError::WrongType {
            key: self.key(key),
            expected: "a whole number of milliseconds",
        })?;
        *slot = Duration::from_millis(ms);
        Ok(())
    }

    fn string(&self, key: &str, slot: &mut String) -> Result<(), ConfigError> {
        if let Some(v) = self.fields.get(key) {
            let s = v.as_str().ok_or_else(|| ConfigError::WrongType {
                key: self.key(key),
                expected: "a string",
            })?;
            *slot = s.to_owned();
        }
        Ok(())
    }

    fn strings(&self, key: &str, slot: &mut Vec<String>) -> Result<(), ConfigError> {
        let Some(v) = self.fields.get(key) else {
            return Ok(());
        };
        let wrong = || ConfigError::WrongType { key: self.key(key), expected: "a list of strings" };
        let items = v.as_array().ok_or_else(wrong)?;
        *slot = items
            .iter()
            .map(|item| item.as_str().map(ToOwned::to_owned).ok_or_else(wrong))
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    /// Like `strings`, but empty entries are rejected: an empty substring
    /// would match every script.
    fn substrings(&self, key: &str, slot: &mut Vec<String>) -> Result<(), ConfigError> {
        let mut items = Vec::new();
        self.strings(key, &mut items)?;
        if !self.fields.contains_key(key) {
            return Ok(());
        }
        if items.iter().any(String::is_empty) {
            return Err(ConfigError::EmptySubstring { key: self.key(key) });
        }
        *slot = items;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lists() {
        let cfg = AnalysisConfig::default();
        assert_eq!(cfg.tracked_build_commands, ["build", "compile", "init"]);
        assert_eq!(
            cfg.tracked_test_commands,
            [
                "test", "unit", "cov", "ci", "integration", "lint", "travis", "e2e", "bench",
                "mocha", "jest", "ava", "tap", "jasmine"
            ]
        );
        assert!(!cfg.track_deps && !cfg.include_dev_deps && !cfg.verbose_mode);
        assert!(cfg.track_build && cfg.track_tests && !cfg.rm_after_cloning);
        assert_eq!(cfg.install_timeout, Duration::from_millis(600_000));
        assert_eq!(cfg.deps_timeout, Duration::from_millis(300_000));
        assert_eq!(cfg.build_timeout, Duration::from_millis(300_000));
        assert_eq!(cfg.test_timeout, Duration::from_millis(600_000));
    }

    #[test]
    fn empty_object_is_default() {
        let (cfg, warnings) = AnalysisConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg, AnalysisConfig::default());
        assert!(warnings.is_empty());
    }

    #[test]
    fn single_list_replaced_wholesale() {
        let (cfg, _) =
            AnalysisConfig::from_json_str(r#"{"test": {"tracked_test_commands": ["test"]}}"#)
                .unwrap();
        let expected =
            AnalysisConfig { tracked_test_commands: vec!["test".into()], ..Default::default() };
        assert_eq!(cfg, expected);
    }

    #[test]
    fn meta_info_keys_use_file_spelling() {
        let text = r#"{"meta_info": {"VERBOSE_MODE": true, "QL_queries": ["q.ql"],
            "scripts_over_code": ["a.sh", "b.sh"], "ignored_commands": ["lint"],
            "ignored_substrings": ["eslint"], "rm_after_cloning": true}}"#;
        let (cfg, warnings) = AnalysisConfig::from_json_str(text).unwrap();
        assert!(warnings.is_empty());
        assert!(cfg.verbose_mode && cfg.rm_after_cloning);
        assert_eq!(cfg.ql_queries, ["q.ql"]);
        assert_eq!(cfg.scripts_over_code, ["a.sh", "b.sh"]);
        assert_eq!(cfg.ignored_commands, ["lint"]);
        assert_eq!(cfg.ignored_substrings, ["eslint"]);
    }

    #[test]
    fn unknown_keys_warn() {
        let (cfg, warnings) =
            AnalysisConfig::from_json_str(r#"{"install": {"timeout": 5, "retries": 2}, "extra": 1}"#)
                .unwrap();
        assert_eq!(cfg.install_timeout, Duration::from_millis(5));
        assert_eq!(
            warnings,
            [
                ConfigWarning::UnknownKey("extra".into()),
                ConfigWarning::UnknownKey("install.retries".into())
            ]
        );
    }

    #[test]
    fn malformed_json_is_fatal() {
        assert!(matches!(
            AnalysisConfig::from_json_str("{\"install\": "),
            Err(ConfigError::Malformed(_))
        ));
        assert!(matches!(AnalysisConfig::from_json_str("[1]"), Err(ConfigError::Malformed(_))));
    }

    #[test]
    fn nonpositive_timeouts_are_fatal() {
        for bad in ["0", "-5", "-0.5"] {
            let text = format!(r#"{{"build": {{"timeout": {bad}}}}}"#);
            assert_eq!(
                AnalysisConfig::from_json_str(&text),
                Err(ConfigError::NonPositiveTimeout { key: "build.timeout".into() })
            );
        }
    }

    #[test]
    fn type_errors() {
        assert!(matches!(
            AnalysisConfig::from_json_str(r#"{"test": {"track_tests": "yes"}}"#),
            Err(ConfigError::WrongType { .. })
        ));
        assert!(matches!(
            AnalysisConfig::from_json_str(r#"{"test": []}"#),
            Err(ConfigError::WrongType { .. })
        ));
        assert!(matches!(
            AnalysisConfig::from_json_str(r#"{"build": {"tracked_build_commands": [1]}}"#),
            Err(ConfigError::WrongType { .. })
        ));
    }

    #[test]
    fn empty_substring_rejected() {
        assert_eq!(
            AnalysisConfig::from_json_str(r#"{"build": {"tracked_build_commands": ["build", ""]}}"#),
            Err(ConfigError::EmptySubstring { key: "build.tracked_build_commands".into() })
        );
    }

    #[test]
    fn to_json_reloads_identically() {
        let cfg = AnalysisConfig {
            track_deps: true,
            ignored_substrings: vec!["--watch".into()],
            test_timeout: Duration::from_millis(1234),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg.to_json()).unwrap();
        let (reloaded, warnings) = AnalysisConfig::from_json_str(&text).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(reloaded, cfg);
    }
}
