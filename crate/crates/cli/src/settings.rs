//! `key=value` configuration files and the list/model syntaxes shared by
//! flags and files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dast_core::{Distribution, Injection, InjectionSpec};

use crate::error::{CliError, CliResult};

/// Keys accepted in configuration files; each mirrors the long flag of the
/// same name.
pub const KEYS: &[&str] = &[
    "input",
    "column",
    "dither",
    "seed",
    "k",
    "kstar",
    "k0star",
    "k0-factor",
    "k0-exponent",
    "k0max",
    "regimes",
    "a",
    "q",
    "xi",
    "tail",
    "lower-transform",
    "kind",
    "format",
    "dist",
    "params",
    "n",
    "reps",
    "inject",
    "intensity",
    "xi-known",
    "grid",
];

#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", i + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!(
                    "line {}: unknown key '{key}'",
                    i + 1
                )));
            }
            if entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key '{key}'",
                    i + 1
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn get<T>(&self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Config(format!("{key}: cannot parse '{v}': {e}")))
            })
            .transpose()
    }

    /// The flag value when given, else the file value.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn require<T>(&self, flag: Option<T>, key: &str) -> CliResult<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| CliError::Config(format!("missing required setting '{key}'")))
    }
}

/// Comma-separated counts; an item `a:b:step` expands to `a, a+step, ..., <= b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountList(pub Vec<usize>);

impl FromStr for CountList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim) {
            let parts: Vec<&str> = item.split(':').collect();
            let num = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("'{p}': {e}"));
            match parts.as_slice() {
                [single] => out.push(num(single)?),
                [from, to, step] => {
                    let (from, to, step) = (num(from)?, num(to)?, num(step)?);
                    if step == 0 || from > to {
                        return Err(format!("empty range '{item}'"));
                    }
                    out.extend((from..=to).step_by(step));
                }
                _ => return Err(format!("expected N or FROM:TO:STEP, got '{item}'")),
            }
        }
        Ok(CountList(out))
    }
}

impl fmt::Display for CountList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&items.join(","))
    }
}

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("'{}': {e}", p.trim()))
            })
            .collect::<Result<_, _>>()
            .map(RealList)
    }
}

/// Kind and size of an injected outlier block, e.g. `exp:10` or `scl:3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectionShape {
    pub exponentiated: bool,
    pub k0: usize,
}

impl InjectionShape {
    pub fn with_intensity(self, intensity: f64) -> InjectionSpec {
        let kind = if self.exponentiated {
            Injection::Exponentiated { l: intensity }
        } else {
            Injection::Scaled { c: intensity }
        };
        InjectionSpec { kind, k0: self.k0 }
    }
}

impl FromStr for InjectionShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, k0) = s
            .split_once(':')
            .ok_or_else(|| format!("expected exp:K0 or scl:K0, got '{s}'"))?;
        let exponentiated = match kind.trim() {
            "exp" | "exponentiated" => true,
            "scl" | "scaled" => false,
            other => return Err(format!("unknown injection kind '{other}'")),
        };
        let k0 = k0.trim().parse().map_err(|e| format!("'{k0}': {e}"))?;
        Ok(Self { exponentiated, k0 })
    }
}

/// Builds a sampling model from a family name and its parameter list.
pub fn distribution(name: &str, params: &[f64]) -> CliResult<Distribution> {
    let want = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "{name} takes {n} parameters, got {}",
                params.len()
            )))
        }
    };
    let d = match name {
        "t" | "student-t" => {
            want(1)?;
            Distribution::StudentT { nu: params[0] }
        }
        "burr" => {
            want(3)?;
            Distribution::Burr {
                eta: params[0],
                lambda: params[1],
                tau: params[2],
            }
        }
        "lognormal" => {
            want(2)?;
            Distribution::Lognormal {
                mu: params[0],
                sigma: params[1],
            }
        }
        "normal" => {
            want(2)?;
            Distribution::Normal {
                mu: params[0],
                sigma: params[1],
            }
        }
        "weibull" => {
            want(2)?;
            Distribution::Weibull {
                lambda: params[0],
                tau: params[1],
            }
        }
        "beta" => {
            want(2)?;
            Distribution::Beta {
                p: params[0],
                q: params[1],
            }
        }
        "reverse-burr" => {
            let endpoint = match params.len() {
                3 => 1.0,
                _ => {
                    want(4)?;
                    params[3]
                }
            };
            Distribution::ReverseBurr {
                eta: params[0],
                lambda: params[1],
                tau: params[2],
                endpoint,
            }
        }
        "pareto" => {
            want(1)?;
            Distribution::Pareto { alpha: params[0] }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown distribution '{other}' (t, burr, lognormal, normal, weibull, beta, \
                 reverse-burr, pareto)"
            )))
        }
    };
    d.validate()?;
    Ok(d)
}
