//! Key-value config files (`key = value` lines, `#` comments) merged under
//! command-line overrides.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    values: HashMap<String, String>,
}

impl ConfigMap {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("config line {} is not `key = value`: {raw}", lineno + 1);
            };
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigMap { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// CLI value wins over config value.
    pub fn pick<T: Clone>(&self, cli: Option<T>, key: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
        if let Some(v) = cli {
            return Ok(Some(v));
        }
        match self.get(key) {
            Some(s) => Ok(Some(parse(s)?)),
            None => Ok(None),
        }
    }

    pub fn pick_f64(&self, cli: Option<f64>, key: &str) -> Result<Option<f64>> {
        self.pick(cli, key, |s| s.parse::<f64>().with_context(|| format!("bad number for {key}: {s}")))
    }

    pub fn pick_usize(&self, cli: Option<usize>, key: &str) -> Result<Option<usize>> {
        self.pick(cli, key, |s| s.parse::<usize>().with_context(|| format!("bad integer for {key}: {s}")))
    }

    pub fn pick_u64(&self, cli: Option<u64>, key: &str) -> Result<Option<u64>> {
        self.pick(cli, key, |s| s.parse::<u64>().with_context(|| format!("bad integer for {key}: {s}")))
    }

    pub fn pick_string(&self, cli: Option<String>, key: &str) -> Result<Option<String>> {
        self.pick(cli, key, |s| Ok(s.to_string()))
    }
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad number `{t}`")))
        .collect()
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad integer `{t}`")))
        .collect()
}

/// Segment list for the oracle: "LxW,LxW,..." pairs.
pub fn parse_segments(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|t| {
            let Some((l, w)) = t.trim().split_once('x') else {
                bail!("segment `{t}` is not LENGTHxWEIGHT");
            };
            Ok((
                l.trim().parse::<f64>().with_context(|| format!("bad length `{l}`"))?,
                w.trim().parse::<f64>().with_context(|| format!("bad weight `{w}`"))?,
            ))
        })
        .collect()
}
