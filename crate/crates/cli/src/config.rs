//! Run settings assembled from an optional `key = value` file and command
//! line flags, with flags taking precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use ybe_core::qspecial::{c64, C64};
use ybe_core::sampling::Interval;
use ybe_core::suites::{expand_suite_name, RunConfig, Suite};

/// Invalid configuration: unknown keys, malformed values or empty ranges.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: expected key = value, found '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for '{key}': {reason}")]
    Value { key: String, value: String, reason: String },
}

/// Output format of reports and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => Err("expected json, csv or text".into()),
        }
    }
}

/// Keys accepted in config files and `--param` flags.
pub const KEYS: [&str; 16] = [
    "suite",
    "seed",
    "samples",
    "tolerance",
    "trunc",
    "format",
    "out",
    "timing",
    "threads",
    "max_terms",
    "tail_tolerance",
    "q",
    "p",
    "w",
    "z_abs",
    "z_phase",
];

/// Raw `key -> value` settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    /// Parses `key = value` lines; blank lines and lines starting with `#`
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let s = Self(map);
        s.check_keys()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::parse(&text)
    }

    fn check_keys(&self) -> Result<(), ConfigError> {
        match self.0.keys().find(|k| !KEYS.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::UnknownKey(k.clone())),
            None => Ok(()),
        }
    }

    /// Sets `key` when `value` is present, replacing any earlier value.
    pub fn set(&mut self, key: &str, value: Option<String>) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        if let Some(v) = value {
            self.0.insert(key.to_string(), v);
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn assign(&mut self, text: &str) -> Result<(), ConfigError> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: 0, text: text.to_string() })?;
        self.set(k.trim(), Some(v.trim().to_string()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| value_error(key, v, &e.to_string())))
            .transpose()
    }

    fn interval(&self, key: &str, default: Interval, inside: Interval) -> Result<Interval, ConfigError> {
        let Some(v) = self.get(key) else { return Ok(default) };
        let (lo, hi) = parse_interval(v).map_err(|r| value_error(key, v, &r))?;
        if lo > hi || lo < inside.0 || hi > inside.1 {
            return Err(value_error(key, v, &format!("range must lie in [{}, {}] with lo <= hi", inside.0, inside.1)));
        }
        Ok((lo, hi))
    }

    /// Resolved check settings.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let suite_name = self.get("suite").unwrap_or("all");
        let suites = expand_suite_name(suite_name).map_err(|r| value_error("suite", suite_name, &r))?;
        let mut run = RunConfig {
            seed: self.parsed("seed")?.unwrap_or(0),
            samples: self.parsed("samples")?,
            ..RunConfig::default()
        };
        if run.samples == Some(0) {
            return Err(value_error("samples", "0", "must be at least 1"));
        }
        run.tolerance = self.parsed("tolerance")?;
        if let Some(t) = run.tolerance {
            if t.is_nan() || t <= 0.0 {
                return Err(value_error("tolerance", &t.to_string(), "must be positive"));
            }
        }
        run.order = self.parsed("trunc")?;
        if run.order == Some(0) {
            return Err(value_error("trunc", "0", "must be at least 1"));
        }
        run.threads = self.parsed("threads")?;
        run.timing = self.parsed("timing")?.unwrap_or(false);
        if let Some(m) = self.parsed::<usize>("max_terms")? {
            run.policy.max_terms = m;
        }
        if let Some(t) = self.parsed::<f64>("tail_tolerance")? {
            if t.is_nan() || t <= 0.0 {
                return Err(value_error("tail_tolerance", &t.to_string(), "must be positive"));
            }
            run.policy.tail_tolerance = t;
        }
        let b = run.bounds;
        let unit = (f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        run.bounds.q = self.interval("q", b.q, unit)?;
        run.bounds.p = self.interval("p", b.p, unit)?;
        run.bounds.w = self.interval("w", b.w, (f64::MIN_POSITIVE, f64::MAX))?;
        run.bounds.z_abs = self.interval("z_abs", b.z_abs, (f64::MIN_POSITIVE, f64::MAX))?;
        run.bounds.z_phase = self.interval("z_phase", b.z_phase, (-std::f64::consts::PI, std::f64::consts::PI))?;
        let format = self.parsed("format")?.unwrap_or_default();
        let out = self.get("out").map(PathBuf::from);
        Ok(Resolved { suites, run, format, out })
    }
}

/// Fully parsed settings for `check`.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub suites: Vec<Suite>,
    pub run: RunConfig,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn value_error(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Value { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

/// Parses `x` (a degenerate range) or `lo..hi`.
pub fn parse_interval(text: &str) -> Result<Interval, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    match text.split_once("..") {
        Some((a, b)) => Ok((num(a)?, num(b)?)),
        None => {
            let x = num(text)?;
            Ok((x, x))
        }
    }
}

/// Parses a complex number written `re` or `re,im`.
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    match text.split_once(',') {
        Some((a, b)) => Ok(c64(num(a)?, num(b)?)),
        None => Ok(c64(num(text)?, 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut s = Settings::parse("# comment\nsuite = qybe6v\nseed=5\nq = 0.2..0.3\n\n").unwrap();
        s.set("seed", Some("9".into())).unwrap();
        s.set("samples", None).unwrap();
        let r = s.resolve().unwrap();
        assert_eq!(r.suites, vec![Suite::Qybe6v]);
        assert_eq!(r.run.seed, 9);
        assert_eq!(r.run.samples, None);
        assert_eq!(r.run.bounds.q, (0.2, 0.3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Settings::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(Settings::parse("just text"), Err(ConfigError::Syntax { .. })));
        let bad = |t: &str| Settings::parse(t).unwrap().resolve().is_err();
        assert!(bad("tolerance = 0"));
        assert!(bad("tolerance = -1e-3"));
        assert!(bad("q = 0.5..0.2"));
        assert!(bad("q = 1.5"));
        assert!(bad("suite = nope"));
        assert!(bad("samples = 0"));
        assert!(bad("format = xml"));
    }

    #[test]
    fn parses_numbers() {
        assert_eq!(parse_interval("0.4").unwrap(), (0.4, 0.4));
        assert_eq!(parse_interval("0.1..0.2").unwrap(), (0.1, 0.2));
        assert_eq!(parse_complex("0.5,-0.25").unwrap(), c64(0.5, -0.25));
        assert_eq!(parse_complex("2").unwrap(), c64(2.0, 0.0));
        assert!(parse_complex("x").is_err());
    }
}
