//! Flat `key=value` run manifest.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use iob_core::store::write_atomic;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut m = RunManifest::default();
        m.set("command", command);
        m.set("argv", std::env::args().collect::<Vec<_>>().join(" "));
        m.set("tool_version", env!("CARGO_PKG_VERSION"));
        m.stamp("started_at");
        m
    }

    /// Sets `key`, replacing an earlier value.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        // Keys and values are single-line by construction.
        let value = value.to_string().replace('\n', " ");
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn stamp(&mut self, key: &str) {
        self.set(key, Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn parse(text: &str) -> RunManifest {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        RunManifest { entries }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes()).with_context(|| format!("writing manifest {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_replaces_and_round_trips() {
        let mut m = RunManifest::new("pipeline");
        m.set("seed", 42);
        m.set("seed", 7);
        m.set("note", "two\nlines");
        let back = RunManifest::parse(&m.render());
        assert_eq!(back, m);
        assert_eq!(back.get("seed"), Some("7"));
        assert_eq!(back.get("note"), Some("two lines"));
    }
}
