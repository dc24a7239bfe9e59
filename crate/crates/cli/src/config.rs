//! `key = value` run configuration. Blank lines and `#` comments are skipped;
//! values are read as JSON scalars when they parse, else as bare strings.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, Value>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected `key = value`", no + 1);
            };
            let key = key.trim().replace('-', "_");
            let value = value.trim().trim_matches('"');
            let parsed = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
            entries.insert(key, parsed);
        }
        Ok(Self { entries })
    }

    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                Self::parse(&text)
            }
        }
    }

    /// The flag when given, else the config entry.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .with_context(|| format!("config key `{key}` has an unusable value {v}")),
        }
    }

    /// Overwrites fields of a serializable solver config with entries of the
    /// same name. Keys handled elsewhere are ignored.
    pub fn apply<T: Serialize + DeserializeOwned>(&self, base: T, reserved: &[&str]) -> Result<T> {
        let mut value = serde_json::to_value(base)?;
        let obj = value.as_object_mut().expect("config structs serialize to objects");
        for (k, v) in &self.entries {
            if reserved.contains(&k.as_str()) {
                continue;
            }
            if let Some(slot) = obj.get_mut(k) {
                *slot = v.clone();
            }
        }
        serde_json::from_value(value).context("config entries do not fit the solver settings")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let c = FileConfig::parse("eps = 0.3\n# comment\nmode = sampled\nhead-cap=4\n").unwrap();
        assert_eq!(c.pick::<f64>(None, "eps").unwrap(), Some(0.3));
        assert_eq!(c.pick(Some(0.1), "eps").unwrap(), Some(0.1));
        assert_eq!(c.pick::<String>(None, "mode").unwrap().as_deref(), Some("sampled"));
        assert_eq!(c.pick::<usize>(None, "head_cap").unwrap(), Some(4));
        assert!(FileConfig::parse("nonsense").is_err());
    }
}
