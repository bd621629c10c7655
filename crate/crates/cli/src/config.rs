//! Run configuration: a list of checks with per-check parameter overrides
//! plus global settings. TOML or JSON, selected by file extension.

use serde::{Deserialize, Serialize};
use smoothlab_core::catalog::CheckId;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheckEntry {
    id: String,
    #[serde(default)]
    params: serde_json::Value,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    checks: Vec<RawCheckEntry>,
    #[serde(default)]
    global: GlobalConfig,
    #[serde(default)]
    format: OutputFormat,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub checks: Vec<(CheckId, serde_json::Value)>,
    pub global: GlobalConfig,
    pub format: OutputFormat,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(String),
    UnknownCheck { name: String, suggestion: Option<String> },
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::UnknownCheck { name, suggestion } => {
                write!(f, "unknown check id {name:?}")?;
                if let Some(s) = suggestion {
                    write!(f, " (did you mean {s:?}?)")?;
                }
                write!(
                    f,
                    "; valid ids: {}",
                    CheckId::ALL
                        .iter()
                        .map(|c| c.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn suggest(name: &str) -> Option<String> {
    CheckId::ALL
        .iter()
        .map(|c| (edit_distance(name, c.name()), c.name()))
        .min()
        .filter(|&(d, _)| d <= 3)
        .map(|(_, n)| n.to_string())
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    let raw: RawConfig = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?,
        _ => toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?,
    };
    let mut checks = Vec::with_capacity(raw.checks.len());
    for entry in raw.checks {
        let id = CheckId::parse(&entry.id).ok_or_else(|| ConfigError::UnknownCheck {
            suggestion: suggest(&entry.id),
            name: entry.id.clone(),
        })?;
        checks.push((id, entry.params));
    }
    Ok(RunConfig {
        checks,
        global: raw.global,
        format: raw.format,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suggestion_catches_typo() {
        assert_eq!(suggest("JACKSON_TRIGG").as_deref(), Some("JACKSON_TRIG"));
        assert_eq!(suggest("DIRECT_TRG").as_deref(), Some("DIRECT_TRIG"));
    }

    #[test]
    fn toml_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            r#"
format = "csv"

[global]
seed = 7

[[checks]]
id = "DT_SCALING"

[checks.params]
p = 0.75
"#,
        )
        .unwrap();
        let cfg = load_config(&path).unwrap();
        assert_eq!(cfg.checks.len(), 1);
        assert_eq!(cfg.global.seed, Some(7));
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.checks[0].1["p"], serde_json::json!(0.75));
    }

    #[test]
    fn unknown_check_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[[checks]]\nid = \"JACKSON_TRIGG\"\n").unwrap();
        match load_config(&path) {
            Err(ConfigError::UnknownCheck { suggestion, .. }) => {
                assert_eq!(suggestion.as_deref(), Some("JACKSON_TRIG"));
            }
            other => panic!("expected unknown-check error, got {other:?}"),
        }
    }
}
