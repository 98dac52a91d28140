//! Plain-text `key = value` configuration with layered overrides.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use gamescope_core::numerics::DenseMatrix;

use crate::error::{AppError, Result};

/// Every key the commands understand. Anything else is rejected so typos
/// do not silently fall back to defaults.
pub const KNOWN_KEYS: &[&str] = &[
    "a",
    "angle_sign",
    "b",
    "beta1",
    "beta2",
    "cadence",
    "center",
    "clip_c",
    "dense",
    "end_offset",
    "endpoints",
    "eps_eig",
    "eps_stat",
    "game",
    "gp_lambda",
    "grid_a",
    "grid_b",
    "grid_points",
    "hidden_dim",
    "iters",
    "k",
    "latent_dim",
    "lr_d",
    "lr_g",
    "optimizer",
    "point",
    "preset",
    "s1",
    "s2",
    "samples",
    "seed",
    "start",
];

/// Ordered key-value map. Later layers replace earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<()> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(AppError::usage(format!("unknown config key '{key}'")))
    }
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses one `key = value` per line. `#` starts a comment, blank lines
    /// are skipped and a repeated key is an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| AppError::format(format!("line {}: expected 'key = value'", no + 1)))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(AppError::format(format!("line {}: bad key '{key}'", no + 1)));
            }
            check_key(key)?;
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(AppError::format(format!("line {}: duplicate key '{key}'", no + 1)));
            }
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(AppError::io(path))?;
        Self::parse(&text)
    }

    /// `key=value` as given on the command line.
    pub fn parse_assignment(s: &str) -> Result<(String, String)> {
        let (k, v) = s.split_once('=').ok_or_else(|| AppError::usage(format!("expected key=value, got '{s}'")))?;
        let k = k.trim();
        check_key(k)?;
        Ok((k.to_string(), v.trim().to_string()))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        check_key(key)?;
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn set_default(&mut self, key: &str, value: impl Into<String>) {
        self.values.entry(key.to_string()).or_insert_with(|| value.into());
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &Config) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// The sorted `key = value` text written next to every run.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    fn typed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|s| s.parse::<T>().map_err(|_| AppError::format(format!("{key}: expected {what}, got '{s}'"))))
            .transpose()
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        let x = self.typed::<f64>(key, "a number")?.unwrap_or(default);
        if !x.is_finite() {
            return Err(AppError::format(format!("{key}: value must be finite")));
        }
        Ok(x)
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.typed(key, "a non-negative integer")?.unwrap_or(default))
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.typed(key, "a non-negative integer")?.unwrap_or(default))
    }

    pub fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(s) => Err(AppError::format(format!("{key}: expected true or false, got '{s}'"))),
        }
    }

    pub fn str<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.raw(key).unwrap_or(default)
    }

    pub fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key).map(|s| parse_vector(s).map_err(|e| AppError::format(format!("{key}: {e}")))).transpose()
    }

    pub fn matrix(&self, key: &str) -> Result<Option<DenseMatrix>> {
        self.raw(key).map(|s| parse_matrix(s).map_err(|e| AppError::format(format!("{key}: {e}")))).transpose()
    }
}

/// Comma-separated numbers, e.g. `1, 1, 0`.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("bad number '{t}'"))
        })
        .collect()
}

/// Rows separated by `;`, entries by `,`, e.g. `1, 0; 0, 1`.
pub fn parse_matrix(s: &str) -> Result<DenseMatrix, String> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_vector).collect::<Result<_, _>>()?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err("rows have different lengths".into());
    }
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    DenseMatrix::from_rows(&refs).map_err(|e| e.to_string())
}
