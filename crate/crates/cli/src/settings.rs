//! Layered key=value settings: built-in defaults, then the seed from the
//! environment, then a config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::CliError;

pub const SEED_ENV: &str = "STOCHMATCH_SEED";
pub const DEFAULT_SEED: &str = "1";

pub const KNOWN_KEYS: &[&str] = &[
    "alg",
    "beta",
    "d",
    "degree",
    "delta",
    "f",
    "family",
    "include-empty",
    "input",
    "instance",
    "k_max",
    "model",
    "n",
    "omniscient",
    "out",
    "p",
    "path-cap",
    "R",
    "report",
    "s",
    "seed",
    "size",
    "suite",
    "t",
    "threads",
    "trials",
];

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<(), CliError> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::config(format!("unknown setting '{key}'")))
    }
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::config(format!("config line {}: expected key=value", i + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        check_key(k)?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn layered(
        defaults: &[(&str, &str)],
        config: Option<&BTreeMap<String, String>>,
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (k, v) in defaults {
            values.insert(k.to_string(), v.to_string());
        }
        let env_seed = std::env::var(SEED_ENV).ok();
        values.insert("seed".into(), env_seed.unwrap_or_else(|| DEFAULT_SEED.into()));
        if let Some(c) = config {
            for (k, v) in c {
                values.insert(k.clone(), v.clone());
            }
        }
        for (k, v) in flags {
            check_key(k)?;
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key)
            .ok_or_else(|| CliError::config(format!("missing required setting '{key}'")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::config(format!("setting '{key}' = '{v}': {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn need<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::config(format!("missing required setting '{key}'")))
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None | Some("false") | Some("0") | Some("no") => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some(v) => Err(CliError::config(format!("setting '{key}' = '{v}' is not a boolean"))),
        }
    }

    /// `a..b` (inclusive) or a comma-separated list.
    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let bad = || CliError::config(format!("setting '{key}' = '{v}': expected a..b or a comma list"));
        if let Some((a, b)) = v.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            return Ok(Some((a..=b).collect()));
        }
        v.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::config(format!("setting '{key}' = '{v}': expected numbers")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// The effective settings as `# key=value` header lines.
    pub fn echo(&self, command: &str) -> Vec<String> {
        let mut out = vec![format!("stochmatch {command}")];
        out.extend(self.values.iter().map(|(k, v)| format!("{k}={v}")));
        out
    }
}
