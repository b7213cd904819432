//! Settings resolved from explicit flags, then a `key = value` file, then defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "alphabet", "norm", "norms", "parity", "cutoff", "depth", "tol", "seed", "output", "format", "trace",
    "modulus", "kind", "samples", "check", "xi-norm", "omega-norm", "source", "z", "t-bound", "min-mult",
    "disc", "word", "emit",
];

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut file = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Config(format!("line {}: unknown key {key:?}", n + 1)));
            }
            file.insert(key, v.trim().to_string());
        }
        Ok(Settings { file, resolved: BTreeMap::new() })
    }

    /// The raw text for `key`: the flag if given, else the file entry.
    fn raw(&self, key: &str, flag: Option<&str>) -> Option<String> {
        flag.map(str::to_string).or_else(|| self.file.get(key).cloned())
    }

    fn record(&mut self, key: &str, value: &impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn get<T: ParseValue + Display>(&mut self, key: &str, flag: Option<&str>, default: T) -> Result<T, CliError> {
        let v = match self.raw(key, flag) {
            Some(text) => T::parse_value(&text).map_err(|e| CliError::Config(format!("{key}: {e}")))?,
            None => default,
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn require<T: ParseValue + Display>(&mut self, key: &str, flag: Option<&str>) -> Result<T, CliError> {
        let text = self.raw(key, flag).ok_or_else(|| CliError::Config(format!("missing --{key}")))?;
        let v = T::parse_value(&text).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
        self.record(key, &v);
        Ok(v)
    }

    pub fn list<T: ParseValue + Display>(&mut self, key: &str, flag: Option<&str>, default: &str) -> Result<Vec<T>, CliError> {
        let text = self.raw(key, flag).unwrap_or_else(|| default.to_string());
        let items = text
            .split(',')
            .map(|t| T::parse_value(t.trim()).map_err(|e| CliError::Config(format!("{key}: {e}"))))
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err(CliError::Config(format!("{key}: empty list")));
        }
        self.resolved.insert(key.to_string(), text);
        Ok(items)
    }

    pub fn optional(&mut self, key: &str, flag: Option<&str>) -> Option<String> {
        let v = self.raw(key, flag)?;
        self.record(key, &v);
        Some(v)
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

pub trait ParseValue: Sized {
    fn parse_value(s: &str) -> Result<Self, String>;
}

impl ParseValue for f64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        let v = f64::from_str(s).map_err(|_| format!("{s:?} is not a number"))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(format!("{s:?} must be positive"));
        }
        Ok(v)
    }
}

impl ParseValue for u64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        // scientific notation is accepted when the value is an integer
        if let Ok(v) = u64::from_str(s) {
            return Ok(v);
        }
        let f = f64::from_str(s).map_err(|_| format!("{s:?} is not an integer"))?;
        if f.fract() != 0.0 || f < 0.0 || f > u64::MAX as f64 {
            return Err(format!("{s:?} is not a non-negative integer"));
        }
        Ok(f as u64)
    }
}

impl ParseValue for String {
    fn parse_value(s: &str) -> Result<Self, String> {
        Ok(s.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let mut s = Settings::parse("alphabet = 5\nnorm=1e3 # comment\n\n").unwrap();
        assert_eq!(s.get::<u64>("alphabet", Some("2"), 1).unwrap(), 2);
        assert_eq!(s.get::<f64>("norm", None, 1.0).unwrap(), 1000.0);
        assert_eq!(s.get::<u64>("cutoff", None, 100).unwrap(), 100);
        assert_eq!(s.resolved()["alphabet"], "2");
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Settings::parse("alphabet 2").is_err());
        assert!(Settings::parse("colour = red").is_err());
        let mut s = Settings::parse("t_bound = 1e8").unwrap();
        assert_eq!(s.get::<u64>("t-bound", None, 0).unwrap(), 100_000_000);
        assert!(s.get::<u64>("depth", Some("2.5"), 1).is_err());
        assert!(s.get::<f64>("norm", Some("-3"), 1.0).is_err());
    }

    #[test]
    fn lists() {
        let mut s = Settings::default();
        assert_eq!(s.list::<u64>("alphabet", Some("2, 3,20"), "2").unwrap(), vec![2, 3, 20]);
        assert_eq!(s.list::<f64>("norms", None, "1e3,1e4").unwrap(), vec![1e3, 1e4]);
    }
}
