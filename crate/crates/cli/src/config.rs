//! Flat key=value configuration with optional `[section]` headers.
//!
//! Sections only group keys; every key is global and may appear once. Values
//! are layered: config file, then `WORKBENCH_SEED` for `seed`, then
//! `--key value` flags. Dashes in flag names are read as underscores.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::error::CliError;

pub const SEED_ENV: &str = "WORKBENCH_SEED";

/// Flags that take no value.
const SWITCHES: &[&str] = &["bits"];

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Effective value of every key read so far, defaults included.
    resolved: RefCell<BTreeMap<String, String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Config {
    pub fn load(path: Option<&Path>, overrides: &[String], env_seed: Option<String>) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        let (file, flags) = split_config_flag(path, overrides)?;
        if let Some(path) = file {
            let ini = Ini::load_from_file(&path).map_err(|e| CliError::usage("config", format!("{}: {e}", path)))?;
            for (_, props) in ini.iter() {
                for (k, v) in props.iter() {
                    let k = normalize(k);
                    if values.insert(k.clone(), v.trim().to_string()).is_some() {
                        return Err(CliError::usage(&k, "key appears more than once in the config file"));
                    }
                }
            }
        }
        if let Some(seed) = env_seed {
            parse_u64(&seed).map_err(|m| CliError::usage(SEED_ENV, m))?;
            values.insert("seed".into(), seed.trim().to_string());
        }
        for (k, v) in flags {
            values.insert(k, v);
        }
        Ok(Config { values, resolved: RefCell::default() })
    }

    #[cfg(test)]
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        Config {
            values: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            resolved: RefCell::default(),
        }
    }

    /// Rejects keys the subcommand does not read.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str()) && !COMMON.contains(&k.as_str())) {
            Some(k) => Err(CliError::usage(k, "unknown key for this subcommand")),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let v = self.values.get(key).map(String::as_str);
        if let Some(v) = v {
            self.resolved.borrow_mut().insert(key.into(), v.into());
        }
        v
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.resolved.borrow_mut().insert(key.into(), v.clone());
        v
    }

    pub fn get<T>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr + ToString,
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            Some(v) => {
                let parsed = v.parse::<T>().map_err(|e| CliError::usage(key, format!("cannot parse {v:?}: {e}")))?;
                self.resolved.borrow_mut().insert(key.into(), v.clone());
                Ok(parsed)
            }
            None => {
                self.resolved.borrow_mut().insert(key.into(), default.to_string());
                Ok(default)
            }
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        self.get(key, false)
    }

    /// Seeds accept decimal or `0x` hexadecimal.
    pub fn seed(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.values.get(key) {
            Some(v) => {
                let s = parse_u64(v).map_err(|m| CliError::usage(key, m))?;
                self.resolved.borrow_mut().insert(key.into(), v.clone());
                Ok(s)
            }
            None => {
                self.resolved.borrow_mut().insert(key.into(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str, default: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.string(key, default);
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| CliError::usage(key, format!("cannot parse {s:?}: {e}"))))
            .collect()
    }

    /// Everything read so far, for the JSON echo.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }
}

/// Keys every subcommand accepts.
pub const COMMON: &[&str] = &["seed", "out", "json", "bits"];

fn parse_u64(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("cannot parse seed {s:?}: {e}"))
}

/// Splits `--key value`, `--key=value` and switches; a `--config` among the
/// overrides is honoured too.
#[allow(clippy::type_complexity)]
fn split_config_flag(
    path: Option<&Path>,
    overrides: &[String],
) -> Result<(Option<String>, Vec<(String, String)>), CliError> {
    let mut file = path.map(|p| p.display().to_string());
    let mut flags = Vec::new();
    let mut it = overrides.iter().peekable();
    while let Some(tok) = it.next() {
        let Some(body) = tok.strip_prefix("--") else {
            return Err(CliError::usage(tok, "expected --key value"));
        };
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (normalize(k), v.to_string()),
            None => {
                let key = normalize(body);
                if SWITCHES.contains(&key.as_str()) {
                    (key, "true".into())
                } else {
                    match it.next_if(|v| !v.starts_with("--")) {
                        Some(v) => (key, v.clone()),
                        None => return Err(CliError::usage(&key, "missing value")),
                    }
                }
            }
        };
        if key.is_empty() {
            return Err(CliError::usage(tok, "empty key"));
        }
        if key == "config" {
            file = Some(value);
        } else {
            flags.push((key, value));
        }
    }
    Ok((file, flags))
}
