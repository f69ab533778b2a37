//! Parameter resolution: built-in defaults, then a config file, then
//! `--set` pairs, then named flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use dirdp::kvconf;

use crate::error::CliError;
use crate::output::META_PREFIX;

#[derive(Debug, Clone)]
pub struct Params {
    command: &'static str,
    values: BTreeMap<String, String>,
}

/// Reads `key = value` pairs from a config file. A file written by this
/// tool contributes only its metadata header, so an output file can be
/// passed back to reproduce itself.
pub fn read_config(path: &Path, command: &str) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let meta: Vec<&str> = text.lines().filter_map(|l| l.strip_prefix(META_PREFIX)).collect();
    let mut kv = if meta.is_empty() { kvconf::parse(&text) } else { kvconf::parse(&meta.join("\n")) }
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(c) = kv.remove("command") {
        if c != command {
            return Err(CliError::Usage(format!("{} was written by `{c}`, not `{command}`", path.display())));
        }
    }
    Ok(kv)
}

impl Params {
    pub fn resolve(
        command: &'static str,
        defaults: Vec<(String, String)>,
        config: Option<&Path>,
        sets: &[String],
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = defaults.into_iter().collect();
        let mut layer = |k: String, v: String, from: &str| {
            if !values.contains_key(&k) {
                return Err(CliError::Usage(format!("unknown key {k:?} in {from} for `{command}`")));
            }
            values.insert(k, v);
            Ok(())
        };
        if let Some(path) = config {
            for (k, v) in read_config(path, command)? {
                layer(k, v, "config file")?;
            }
        }
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {s:?}")))?;
            layer(k.trim().to_string(), v.trim().to_string(), "--set")?;
        }
        for (k, v) in flags {
            if let Some(v) = v {
                layer(k.to_string(), v, "flags")?;
            }
        }
        Ok(Self { command, values })
    }

    pub fn command(&self) -> &'static str {
        self.command
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.raw(key);
        if v.is_empty() {
            return Err(CliError::Usage(format!("`{}` needs a value for {key}", self.command)));
        }
        v.parse().map_err(|_| CliError::Usage(format!("{key}: cannot parse {v:?}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        kvconf::parse_list(key, self.raw(key)).map_err(CliError::from)
    }

    /// Everything that determines the output, including the command name.
    pub fn metadata(&self) -> BTreeMap<String, String> {
        let mut m = self.values.clone();
        m.insert("command".into(), self.command.into());
        m
    }

    /// The resolved pairs, minus the keys in `skip`.
    pub fn pairs_except(&self, skip: &[&str]) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !skip.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

pub fn defaults(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}
