use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A subcommand plus validated `key=value` parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    pub params: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(command: impl Into<String>) -> Self {
        Self { command: command.into(), params: BTreeMap::new() }
    }

    /// Parse `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse_kv(command: impl Into<String>, text: &str) -> Result<Self> {
        let mut c = Self::new(command);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected key=value, got {line:?}", i + 1)));
            };
            c.set(k.trim(), v.trim());
        }
        Ok(c)
    }

    /// Insert or override a parameter.
    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.params.insert(key.into(), value.into());
    }

    /// Later values win.
    pub fn merge(&mut self, other: &ExperimentConfig) {
        for (k, v) in &other.params {
            self.params.insert(k.clone(), v.clone());
        }
    }

    /// Reject any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!("unknown key '{k}' for '{}'", self.command))),
            None => Ok(()),
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("key '{key}': cannot parse {v:?}"))),
        }
    }

    pub fn get_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("key '{key}': cannot parse {s:?}"))))
                .collect(),
        }
    }
}
