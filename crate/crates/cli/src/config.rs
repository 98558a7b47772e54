//! Run parameters: `key = value` files merged under command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use capoint::field2d::Bc;

/// Every parameter any subcommand takes. `None` means "not given"; each
/// subcommand applies its own defaults and range checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub coeff: Option<String>,
    pub f: Option<String>,
    pub u0: Option<String>,
    pub family: Option<String>,
    pub params: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub grid: Option<usize>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub h: Option<f64>,
    pub bc: Option<Bc>,
    pub p: Option<f64>,
    pub py: Option<f64>,
    pub eps: Option<f64>,
    pub tend: Option<f64>,
    pub dt: Option<f64>,
    pub levels: Option<usize>,
    pub emit: Option<PathBuf>,
    pub emit_curve: Option<PathBuf>,
    pub seed: Option<u64>,
    pub sweep: Option<bool>,
}

/// Keys accepted in config files (`-` and `_` are interchangeable).
pub const KEYS: &[&str] = &[
    "coeff", "f", "u0", "family", "params", "k", "grid", "n", "tol", "h", "bc", "p", "py", "eps",
    "tend", "dt", "levels", "emit", "emit_curve", "seed", "sweep",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("bad value '{value}' for '{key}': {e}"))
}

pub fn parse_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("bad list entry '{s}': {e}")))
        .collect()
}

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let text = || Some(value.to_string());
        match key {
            "coeff" => self.coeff = text(),
            "f" => self.f = text(),
            "u0" => self.u0 = text(),
            "family" => self.family = text(),
            "params" => self.params = Some(parse_list(value)?),
            "k" => self.k = Some(parse_value(key, value)?),
            "grid" => self.grid = Some(parse_value(key, value)?),
            "n" => self.n = Some(parse_value(key, value)?),
            "tol" => self.tol = Some(parse_value(key, value)?),
            "h" => self.h = Some(parse_value(key, value)?),
            "bc" => self.bc = Some(parse_value(key, value)?),
            "p" => self.p = Some(parse_value(key, value)?),
            "py" => self.py = Some(parse_value(key, value)?),
            "eps" => self.eps = Some(parse_value(key, value)?),
            "tend" => self.tend = Some(parse_value(key, value)?),
            "dt" => self.dt = Some(parse_value(key, value)?),
            "levels" => self.levels = Some(parse_value(key, value)?),
            "emit" => self.emit = Some(PathBuf::from(value)),
            "emit_curve" => self.emit_curve = Some(PathBuf::from(value)),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "sweep" => self.sweep = Some(parse_value(key, value)?),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Parses config text: one `key = value` per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            if value.is_empty() {
                return Err(err(format!("missing value for '{key}'")));
            }
            cfg.set(&key, value).map_err(err)?;
        }
        Ok(cfg)
    }

    /// Fills every unset field from `other`.
    pub fn or(self, other: RunConfig) -> RunConfig {
        RunConfig {
            coeff: self.coeff.or(other.coeff),
            f: self.f.or(other.f),
            u0: self.u0.or(other.u0),
            family: self.family.or(other.family),
            params: self.params.or(other.params),
            k: self.k.or(other.k),
            grid: self.grid.or(other.grid),
            n: self.n.or(other.n),
            tol: self.tol.or(other.tol),
            h: self.h.or(other.h),
            bc: self.bc.or(other.bc),
            p: self.p.or(other.p),
            py: self.py.or(other.py),
            eps: self.eps.or(other.eps),
            tend: self.tend.or(other.tend),
            dt: self.dt.or(other.dt),
            levels: self.levels.or(other.levels),
            emit: self.emit.or(other.emit),
            emit_curve: self.emit_curve.or(other.emit_curve),
            seed: self.seed.or(other.seed),
            sweep: self.sweep.or(other.sweep),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    RunConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = RunConfig::parse("coeff = exp(x)\nk = 0\n# note\n\nparams = 1, 2 ,3 # trailing\n")
            .unwrap();
        assert_eq!(cfg.coeff.as_deref(), Some("exp(x)"));
        assert_eq!(cfg.k, Some(0));
        assert_eq!(cfg.params, Some(vec![1.0, 2.0, 3.0]));
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::parse("tol = banana").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.to_string().contains("line 1"));
        assert_eq!(RunConfig::parse("k = 1\nwhat = 2").unwrap_err().line, 2);
        assert_eq!(RunConfig::parse("\n\nno equals sign").unwrap_err().line, 3);
    }

    #[test]
    fn empty_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn flags_win() {
        let flags = RunConfig {
            k: Some(2),
            ..Default::default()
        };
        let file = RunConfig::parse("k = 1\nemit-curve = a.csv").unwrap();
        let merged = flags.or(file);
        assert_eq!(merged.k, Some(2));
        assert_eq!(merged.emit_curve, Some(PathBuf::from("a.csv")));
    }

    #[test]
    fn keys_list_is_complete() {
        for key in KEYS {
            let value = match *key {
                "bc" => "mixed",
                "sweep" => "true",
                "params" => "1,2",
                _ => "1",
            };
            RunConfig::parse(&format!("{key} = {value}")).unwrap();
        }
    }
}
