//! Flat `key = value` configuration files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys are
//! case-sensitive; duplicate keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                detail: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config {
                    line: line_no,
                    detail: "empty key".into(),
                });
            }
            if entries
                .insert(key.clone(), (line_no, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::Config {
                    line: line_no,
                    detail: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    /// Parses `key` if present.
    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<V>().map(Some).map_err(|_| Error::Config {
                line: *line,
                detail: format!("cannot parse value `{v}` for `{key}`"),
            }),
        }
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_switch(&self, key: &str, default: bool) -> Result<bool> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((line, v)) => parse_switch(v).ok_or_else(|| Error::Config {
                line: *line,
                detail: format!("expected on/off for `{key}`, found `{v}`"),
            }),
        }
    }

    /// Keys of the form `<prefix>.<n>.<field>`, grouped by index `n`.
    pub fn indexed(&self, prefix: &str) -> BTreeMap<usize, Vec<String>> {
        let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        let head = format!("{prefix}.");
        for k in self.entries.keys() {
            if let Some(rest) = k.strip_prefix(&head) {
                if let Some((idx, _)) = rest.split_once('.') {
                    if let Ok(n) = idx.parse::<usize>() {
                        out.entry(n).or_default().push(k.clone());
                    }
                }
            }
        }
        out
    }

    /// Fails on the first key not accepted by `known`.
    pub fn reject_unknown(&self, known: impl Fn(&str) -> bool) -> Result<()> {
        for (k, (line, _)) in &self.entries {
            if !known(k) {
                return Err(Error::Config {
                    line: *line,
                    detail: format!("unknown key `{k}`"),
                });
            }
        }
        Ok(())
    }

    /// Canonical text, sorted by key, used for hashing.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for (k, (_, v)) in &self.entries {
            s.push_str(k);
            s.push('=');
            s.push_str(v);
            s.push('\n');
        }
        s
    }
}

pub fn parse_switch(v: &str) -> Option<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}
