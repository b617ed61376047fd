//! Session configuration, read from `cnldoc.toml`.
//!
//! ```toml
//! kb = "docs/architecture.kb"
//! source_roots = ["src"]
//! port = 7878
//!
//! [comment_syntax]
//! rs = ["//"]
//! st = ["\""]
//!
//! [budget]
//! add_seconds = 2.0
//! check_seconds = 10.0
//! load_seconds = 120.0
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! Comment prefixes given here extend (and per extension replace) the
//! built-in table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub const CONFIG_FILE: &str = "cnldoc.toml";
pub const DEFAULT_PORT: u16 = 7878;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{what} `{path}` does not exist")]
    Missing { what: &'static str, path: PathBuf },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kb: PathBuf,
    #[serde(default)]
    source_roots: Vec<PathBuf>,
    #[serde(default)]
    port: Option<u16>,
    #[serde(default)]
    comment_syntax: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    budget: Budget,
}

/// Time limits `bench` compares its measurements against.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub add_seconds: f64,
    pub check_seconds: f64,
    pub load_seconds: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { add_seconds: 2.0, check_seconds: 10.0, load_seconds: 120.0 }
    }
}

/// File extension to line-comment prefixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentSyntax(BTreeMap<String, Vec<String>>);

impl Default for CommentSyntax {
    fn default() -> Self {
        let mut map = BTreeMap::new();
        let table: [(&[&str], &str); 3] = [
            (&["rs", "c", "h", "cc", "cpp", "hpp", "java", "js", "ts", "go", "kt", "scala", "swift", "cs"], "//"),
            (&["py", "rb", "sh", "pl", "r", "toml", "yaml", "yml"], "#"),
            (&["hs", "lua", "sql", "ada"], "--"),
        ];
        for (exts, prefix) in table {
            for ext in exts {
                map.insert(ext.to_string(), vec![prefix.to_string()]);
            }
        }
        CommentSyntax(map)
    }
}

impl CommentSyntax {
    pub fn prefixes(&self, path: &Path) -> Option<&[String]> {
        let ext = path.extension()?.to_str()?;
        self.0.get(&ext.to_ascii_lowercase()).map(Vec::as_slice)
    }

    pub fn set(&mut self, ext: &str, prefixes: Vec<String>) {
        self.0.insert(ext.to_ascii_lowercase(), prefixes);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub kb: PathBuf,
    pub source_roots: Vec<PathBuf>,
    pub port: u16,
    pub comment_syntax: CommentSyntax,
    pub budget: Budget,
}

impl SessionConfig {
    /// A configuration with defaults for everything but the kb file.
    pub fn for_kb(kb: impl Into<PathBuf>) -> SessionConfig {
        SessionConfig {
            kb: kb.into(),
            source_roots: Vec::new(),
            port: DEFAULT_PORT,
            comment_syntax: CommentSyntax::default(),
            budget: Budget::default(),
        }
    }

    pub fn load(path: &Path) -> Result<SessionConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        SessionConfig::parse(&text, base).map_err(|source| ConfigError::Toml { path: path.into(), source })
    }

    pub fn parse(text: &str, base: &Path) -> Result<SessionConfig, toml::de::Error> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut comment_syntax = CommentSyntax::default();
        for (ext, prefixes) in raw.comment_syntax {
            comment_syntax.set(&ext, prefixes);
        }
        Ok(SessionConfig {
            kb: base.join(raw.kb),
            source_roots: raw.source_roots.into_iter().map(|p| base.join(p)).collect(),
            port: raw.port.unwrap_or(DEFAULT_PORT),
            comment_syntax,
            budget: raw.budget,
        })
    }

    /// Checks that every referenced path exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.kb.exists() {
            return Err(ConfigError::Missing { what: "knowledge base", path: self.kb.clone() });
        }
        if let Some(root) = self.source_roots.iter().find(|r| !r.exists()) {
            return Err(ConfigError::Missing { what: "source root", path: root.clone() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_paths() {
        let text = "kb = \"a.kb\"\nsource_roots = [\"src\"]\nport = 9000\n[comment_syntax]\nst = ['\"']\nrs = [\"///\", \"//\"]\n\
                    [budget]\nadd_seconds = 1.5\n";
        let cfg = SessionConfig::parse(text, Path::new("/w")).unwrap();
        assert_eq!(cfg.kb, PathBuf::from("/w/a.kb"));
        assert_eq!(cfg.source_roots, vec![PathBuf::from("/w/src")]);
        assert_eq!(cfg.port, 9000);
        assert_eq!(cfg.budget.add_seconds, 1.5);
        assert_eq!(cfg.budget.check_seconds, 10.0);
        assert_eq!(cfg.comment_syntax.prefixes(Path::new("x.st")).unwrap(), ["\""]);
        assert_eq!(cfg.comment_syntax.prefixes(Path::new("x.RS")).unwrap(), ["///", "//"]);
        assert_eq!(cfg.comment_syntax.prefixes(Path::new("x.py")).unwrap(), ["#"]);
        assert!(cfg.comment_syntax.prefixes(Path::new("x.txt")).is_none());
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(SessionConfig::parse("kb = \"a\"\nprot = 1\n", Path::new(".")).is_err());
    }

    #[test]
    fn missing_kb_is_reported() {
        let cfg = SessionConfig::for_kb("/nonexistent/x.kb");
        assert!(matches!(cfg.validate(), Err(ConfigError::Missing { .. })));
    }
}
