//! Key=value config file support.
//!
//! A config file supplies defaults for tuning flags; explicit flags always
//! win. The path comes from `--config`, else the `HEDONO_CONFIG`
//! environment variable, else no file is read. Format: one `key = value`
//! per line, `#` starts a comment, keys match the long flag names.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

const KNOWN_KEYS: [&str; 10] = [
    "jobs",
    "threshold",
    "top-k",
    "top-words",
    "min-anew",
    "min-docs",
    "subsets",
    "subset-size",
    "seed",
    "hist-bins",
];

#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    /// Loads the file named by `--config`, else by `HEDONO_CONFIG`, else
    /// returns an empty config. A flag-named file must exist; a file named
    /// only by the environment variable must too — a dangling pointer is a
    /// config error, not something to ignore silently.
    pub fn load(flag: Option<&Path>) -> Result<Config> {
        let env = std::env::var_os("HEDONO_CONFIG");
        let path = match (flag, env.as_deref()) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) if !p.is_empty() => p.into(),
            _ => return Ok(Config::default()),
        };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    fn parse(text: &str) -> Result<Config> {
        let mut values = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`, got {line:?}", no + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                bail!(
                    "line {}: unknown key {key:?} (known: {})",
                    no + 1,
                    KNOWN_KEYS.join(", ")
                );
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                bail!("line {}: key {key:?} set twice", no + 1);
            }
        }
        Ok(Config { values })
    }

    /// Flag value if given, else the config value, else the default.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        debug_assert!(KNOWN_KEYS.contains(&key));
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config key {key:?}: bad value {raw:?} ({e})")),
            None => Ok(default),
        }
    }
}
