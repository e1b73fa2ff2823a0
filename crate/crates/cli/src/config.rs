//! Config files and their layering under command-line flags.

use std::path::Path;

use anyhow::{bail, Context};
use cra_core::model::Architecture;
use cra_core::solver::SolveOverrides;
use serde::{Deserialize, Serialize};

/// Settings file accepted by `solve --config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub arch: Option<Architecture>,
    pub lambda: Option<f64>,
    pub colors: Option<usize>,
    /// `false` selects the plain `γ ≡ 0` loop.
    pub anneal: Option<bool>,
    #[serde(default)]
    pub solve: SolveOverrides,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(anyhow::Error::from)
        } else {
            toml::from_str(&text).map_err(anyhow::Error::from)
        };
        parsed.with_context(|| format!("invalid config {}", path.display()))
    }
}

/// A value set in both places with different contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Conflict {
    pub key: String,
    pub flag: String,
    pub file: String,
}

impl std::fmt::Display for Conflict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "--{} {} overrides config value {}",
            self.key.replace('_', "-"),
            self.flag,
            self.file
        )
    }
}

/// Picks the flag over the file value, recording a conflict when both are set and differ.
pub fn layer<T: PartialEq + Serialize>(
    key: &str,
    flag: Option<T>,
    file: Option<T>,
    conflicts: &mut Vec<Conflict>,
) -> Option<T> {
    match (flag, file) {
        (Some(a), Some(b)) => {
            if a != b {
                conflicts.push(Conflict {
                    key: key.to_string(),
                    flag: serde_json::to_string(&a).unwrap_or_default(),
                    file: serde_json::to_string(&b).unwrap_or_default(),
                });
            }
            Some(a)
        }
        (a, b) => a.or(b),
    }
}

/// Field-wise `flags > file`.
pub fn merge_overrides(
    flags: &SolveOverrides,
    file: &SolveOverrides,
    conflicts: &mut Vec<Conflict>,
) -> anyhow::Result<SolveOverrides> {
    let serde_json::Value::Object(flags) = serde_json::to_value(flags)? else {
        bail!("overrides do not serialize to a map");
    };
    let serde_json::Value::Object(mut merged) = serde_json::to_value(file)? else {
        bail!("overrides do not serialize to a map");
    };
    for (key, value) in flags {
        if value.is_null() {
            continue;
        }
        match merged.get(&key) {
            Some(old) if !old.is_null() && *old != value => conflicts.push(Conflict {
                key: key.clone(),
                flag: value.to_string(),
                file: old.to_string(),
            }),
            _ => {}
        }
        merged.insert(key, value);
    }
    Ok(serde_json::from_value(serde_json::Value::Object(merged))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_and_conflicts_are_listed() {
        let flags = SolveOverrides {
            lr: Some(0.01),
            seeds: Some(3),
            ..Default::default()
        };
        let file = SolveOverrides {
            lr: Some(0.001),
            seeds: Some(3),
            gamma0: Some(-5.0),
            ..Default::default()
        };
        let mut conflicts = Vec::new();
        let merged = merge_overrides(&flags, &file, &mut conflicts).unwrap();
        assert_eq!(merged.lr, Some(0.01));
        assert_eq!(merged.gamma0, Some(-5.0));
        assert_eq!(merged.seeds, Some(3));
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].to_string(), "--lr 0.01 overrides config value 0.001");
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(toml::from_str::<ConfigFile>("arch = \"gcn\"\n[solve]\nlr = 0.1\n").is_ok());
        assert!(toml::from_str::<ConfigFile>("learning_rate = 0.1\n").is_err());
        assert!(toml::from_str::<ConfigFile>("[solve]\nlearning_rate = 0.1\n").is_err());
    }
}
