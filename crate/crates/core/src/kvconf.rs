//! `key = value` configuration text.
//!
//! One pair per line. `#` starts a comment, blank lines are ignored and
//! later keys override earlier ones.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// A comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {s:?}"))))
        .collect()
}

pub fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_and_comments() {
        let kv = parse("# header\na = 1\n\nb=x y # trailing\na = 2\n").unwrap();
        assert_eq!(kv["a"], "2");
        assert_eq!(kv["b"], "x y");
        assert_eq!(kv.len(), 2);
    }

    #[test]
    fn malformed_lines() {
        assert!(parse("just words").is_err());
        assert!(parse(" = 3").is_err());
    }

    #[test]
    fn lists() {
        let v: Vec<f64> = parse_list("eps", "0.1, 1,10").unwrap();
        assert_eq!(v, vec![0.1, 1.0, 10.0]);
        assert!(parse_list::<u64>("n", "1, x").is_err());
    }
}
