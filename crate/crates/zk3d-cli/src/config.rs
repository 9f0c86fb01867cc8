//! Flat key = value run configuration.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! ignored. Unknown and duplicate keys are rejected so configs cannot
//! silently drift.

use std::collections::HashMap;
use std::fmt;

pub const KNOWN_KEYS: &[&str] = &[
    "L",
    "B_y",
    "B_z",
    "c_s",
    "n_x",
    "n_y",
    "n_z",
    "dt",
    "t_end",
    "amplitude",
    "record_every",
    "scenario",
    "c1_convention",
    "slack",
    "seed",
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Decay,
    Mms,
    Ineq,
    Compare,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    values: HashMap<String, (String, usize)>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            if value.is_empty() {
                return Err(ConfigError(format!("line {}: empty value for `{key}`", lineno + 1)));
            }
            if values
                .insert(key.to_string(), (value.to_string(), lineno + 1))
                .is_some()
            {
                return Err(ConfigError(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(RunConfig { values })
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn req_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.opt_f64(key)?
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                let x: f64 = v
                    .parse()
                    .map_err(|_| ConfigError(format!("key `{key}`: `{v}` is not a number")))?;
                if !x.is_finite() {
                    return Err(ConfigError(format!("key `{key}`: value must be finite")));
                }
                Ok(Some(x))
            }
        }
    }

    pub fn req_usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.opt_usize(key)?
            .ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("key `{key}`: `{v}` is not a count"))),
        }
    }

    pub fn opt_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("key `{key}`: `{v}` is not an integer seed"))),
        }
    }

    pub fn scenario(&self) -> Result<Option<Scenario>, ConfigError> {
        match self.raw("scenario") {
            None => Ok(None),
            Some("decay") => Ok(Some(Scenario::Decay)),
            Some("mms") => Ok(Some(Scenario::Mms)),
            Some("ineq") => Ok(Some(Scenario::Ineq)),
            Some("compare") => Ok(Some(Scenario::Compare)),
            Some(v) => Err(ConfigError(format!(
                "key `scenario`: `{v}` is not one of decay|mms|ineq|compare"
            ))),
        }
    }

    pub fn c1_convention(&self) -> Result<zk3d::C1Convention, ConfigError> {
        match self.raw("c1_convention") {
            None | Some("theorem_statement") => Ok(zk3d::C1Convention::TheoremStatement),
            Some("estimate_iii") => Ok(zk3d::C1Convention::EstimateIii),
            Some(v) => Err(ConfigError(format!(
                "key `c1_convention`: `{v}` is not one of theorem_statement|estimate_iii"
            ))),
        }
    }

    pub fn phys_params(&self) -> Result<zk3d::PhysParams, ConfigError> {
        let l = self.req_f64("L")?;
        let by = self.req_f64("B_y")?;
        let bz = self.req_f64("B_z")?;
        let cs = self.req_f64("c_s")?;
        zk3d::PhysParams::new(cs, l, by, bz).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn grid_counts(&self) -> Result<[usize; 3], ConfigError> {
        Ok([
            self.req_usize("n_x")?,
            self.req_usize("n_y")?,
            self.req_usize("n_z")?,
        ])
    }
}
