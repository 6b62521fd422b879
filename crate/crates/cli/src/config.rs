//! Flat `key = value` run configuration. Command-line flags win over file
//! values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in a config file.
pub const KEYS: &[&str] = &[
    "code", "algorithm", "iters", "clamp", "epsilon1", "epsilon2", "gamma", "gamma_by_degree", "vnum",
    "depth", "degree_cutoff", "ebno", "probe_ebno", "lmin", "lmax", "p", "threshold", "cap", "shift", "psi",
    "trials", "seed", "snrs", "threads", "out",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            let k = k.trim().to_ascii_lowercase().replace('-', "_");
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key '{k}'", i + 1)));
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{v}'"))))
            .transpose()
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// Parses `a,b,c` into numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number '{t}' in list"))))
        .collect()
}

/// Parses `deg:gamma,deg:gamma`.
pub fn parse_gamma_map(s: &str) -> Result<BTreeMap<usize, f64>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let bad = || CliError::Usage(format!("bad degree:gamma pair '{t}'"));
            let (d, g) = t.split_once(':').ok_or_else(bad)?;
            Ok((d.trim().parse().map_err(|_| bad())?, g.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}
