//! Key-value experiment manifests mirroring the CLI flags.
//!
//! A config file holds `key = value` lines (long flag names without the
//! leading dashes, `#` comments allowed). Explicit command-line flags always
//! override file values, which is why every tunable flag parses as Option
//! and resolution happens here rather than through clap defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected 'key = value', got '{raw}'",
                    path.display(),
                    idx + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn get_parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key '{key}': cannot parse '{raw}': {e}"),
            },
        }
    }

    /// CLI value if given, else the config-file value, else None.
    pub fn resolve<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.get_parsed(key),
        }
    }
}
