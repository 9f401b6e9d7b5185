use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vps::config::Config;
use vps::persistence::file_digest;
use vps::{Error, Result};

/// Key-value run record: command line, resolved configuration and digests of
/// every artifact written.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
    artifacts: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.set("command", command);
        m.set("tool_version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn config(&mut self, cfg: &Config) {
        let value: toml::Value = toml::Value::try_from(cfg).unwrap_or(toml::Value::Boolean(false));
        flatten("config", &value, &mut self.entries);
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        for a in &self.artifacts {
            let name = a.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
            let _ = writeln!(out, "artifact.{name} = sha256:{}", file_digest(a)?);
        }
        std::fs::write(path, out).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<(String, String)>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        toml::Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => format!("\"{s}\""),
                    other => other.to_string(),
                })
                .collect();
            out.push((prefix.to_string(), format!("[{}]", parts.join(", "))));
        }
        toml::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
