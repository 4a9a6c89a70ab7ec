//! Flat `key = value` settings with provenance, merged preset < file < flags.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{CliError, Result};

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    Preset(String),
    File { path: String, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::Preset(name) => write!(f, "preset {name}"),
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Flag => write!(f, "command line"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: BTreeMap<String, (String, Origin)>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: impl Fn(usize) -> Origin) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
                origin: origin(i + 1),
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            s.insert(k.trim(), v.trim(), origin(i + 1));
        }
        Ok(s)
    }

    pub fn insert(&mut self, key: &str, value: &str, origin: Origin) {
        self.entries.insert(key.to_string(), (value.to_string(), origin));
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: Settings) {
        self.entries.extend(other.entries);
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(v, _)| v)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn origin(&self, key: &str) -> Origin {
        self.entries.get(key).map_or(Origin::Default, |(_, o)| o.clone())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &Origin)> {
        self.entries.iter().map(|(k, (v, o))| (k.as_str(), v.as_str(), o))
    }

    fn bad(&self, key: &str, message: String) -> CliError {
        CliError::Config { origin: self.origin(key), message: format!("`{key}`: {message}") }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key).ok_or_else(|| self.bad(key, "missing value".into()))?;
        v.parse().map_err(|_| self.bad(key, format!("cannot parse `{v}`")))
    }

    /// Comma-separated list; empty string is the empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let v = self.raw(key).unwrap_or("");
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| self.bad(key, format!("cannot parse list entry `{s}`"))))
            .collect()
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, command: &str, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(self.bad(k, format!("not a setting of `{command}`"))),
            None => Ok(()),
        }
    }

    /// Resolved `key = value` lines in key order.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, (v, _))| format!("{k} = {v}\n")).collect()
    }
}
