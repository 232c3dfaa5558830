//! Run configuration: defaults, `key = value` config files, flag overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{GaugeError, Result};
use crate::fieldgen::FieldGen;
use crate::functionals::{FunctionalKind, FunctionalSpec};
use crate::grid::GridSpec;

/// Every key a config file may set, spelled like the long flags.
pub const KEYS: [&str; 18] = [
    "m",
    "N",
    "k",
    "n",
    "group",
    "seed",
    "amplitude",
    "band-limit",
    "tol",
    "max-iter",
    "out",
    "json",
    "threads",
    "functional",
    "resolutions",
    "momentum",
    "regauge-every",
    "record-every",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Su2,
    Su3,
}

impl Group {
    pub fn k(self) -> usize {
        match self {
            Group::Su2 => 2,
            Group::Su3 => 3,
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su2" => Ok(Group::Su2),
            "su3" => Ok(Group::Su3),
            _ => Err(GaugeError::InvalidArgument(format!("unknown group `{s}` (expected su2 or su3)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` lets commands pick their own dimension (verify runs each case
    /// in its default dimension).
    pub m: Option<usize>,
    pub n_points: usize,
    pub k: usize,
    pub n: usize,
    pub functional: FunctionalKind,
    pub seed: u64,
    pub amplitude: f64,
    pub band_limit: usize,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub out: PathBuf,
    pub json: bool,
    pub threads: Option<usize>,
    pub resolutions: Option<Vec<usize>>,
    pub momentum: bool,
    pub regauge_every: usize,
    pub record_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: None,
            n_points: 32,
            k: 2,
            n: 2,
            functional: FunctionalKind::Yn,
            seed: 0,
            amplitude: 0.05,
            band_limit: 2,
            tol: None,
            max_iter: None,
            out: PathBuf::from("out"),
            json: false,
            threads: None,
            resolutions: None,
            momentum: false,
            regauge_every: 0,
            record_every: 1,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| GaugeError::InvalidArgument(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(GaugeError::InvalidArgument(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|s| parse(key, s.trim())).collect()
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| GaugeError::InvalidArgument(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(GaugeError::InvalidArgument(format!("config line {}: unknown key `{key}`", i + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "m" => self.m = Some(parse(key, value)?),
            "N" => self.n_points = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "group" => self.k = Group::parse(value)?.k(),
            "seed" => self.seed = parse(key, value)?,
            "amplitude" => self.amplitude = parse(key, value)?,
            "band-limit" => self.band_limit = parse(key, value)?,
            "tol" => self.tol = Some(parse(key, value)?),
            "max-iter" => self.max_iter = Some(parse(key, value)?),
            "out" => self.out = PathBuf::from(value),
            "json" => self.json = parse_bool(key, value)?,
            "threads" => self.threads = Some(parse(key, value)?),
            "functional" => self.functional = value.parse()?,
            "resolutions" => self.resolutions = Some(parse_list(key, value)?),
            "momentum" => self.momentum = parse_bool(key, value)?,
            "regauge-every" => self.regauge_every = parse(key, value)?,
            "record-every" => self.record_every = parse(key, value)?,
            _ => return Err(GaugeError::InvalidArgument(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (key, value) in parse_config_text(&text)? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.m.unwrap_or(2)
    }

    /// Checks `m ≤ 2n`, `N` even, and the band limit against `N`.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(GaugeError::InvalidArgument(format!("n={} must be >= 2", self.n)));
        }
        if let Some(m) = self.m {
            if m > 2 * self.n {
                return Err(GaugeError::InvalidArgument(format!(
                    "constraint m <= 2n violated: m={m}, n={}",
                    self.n
                )));
            }
        }
        if self.n_points % 2 != 0 {
            return Err(GaugeError::InvalidArgument(format!("constraint N even violated: N={}", self.n_points)));
        }
        if 2 * self.band_limit >= self.n_points {
            return Err(GaugeError::InvalidArgument(format!(
                "constraint band_limit < N/2 violated: band_limit={}, N={}",
                self.band_limit, self.n_points
            )));
        }
        if !(self.amplitude >= 0.0) {
            return Err(GaugeError::InvalidArgument("amplitude must be >= 0".into()));
        }
        if self.threads == Some(0) {
            return Err(GaugeError::InvalidArgument("threads must be >= 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        self.grid_at(self.n_points)
    }

    pub fn grid_at(&self, n_points: usize) -> Result<GridSpec> {
        GridSpec::new(self.dim(), n_points, self.k, self.n.max(self.dim().div_ceil(2)))
    }

    pub fn spec(&self) -> Result<FunctionalSpec> {
        FunctionalSpec::new(self.functional, self.n)
    }

    pub fn field_gen(&self) -> FieldGen {
        FieldGen::new(self.seed, self.band_limit, self.amplitude)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parsing() {
        let map = parse_config_text("# comment\nm = 4\n\nN=16  # trailing\namplitude = 0.1\n").unwrap();
        assert_eq!(map["m"], "4");
        assert_eq!(map["N"], "16");
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("m 4").is_err());
    }

    #[test]
    fn settings_and_validation() {
        let mut c = RunConfig::default();
        c.set("group", "su3").unwrap();
        assert_eq!(c.k, 3);
        c.set("functional", "z").unwrap();
        assert_eq!(c.functional, FunctionalKind::Zn);
        c.set("resolutions", "16, 32").unwrap();
        assert_eq!(c.resolutions, Some(vec![16, 32]));
        c.set("m", "6").unwrap();
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("m <= 2n"), "{msg}");
        c.set("n", "3").unwrap();
        c.validate().unwrap();
        c.set("band-limit", "16").unwrap();
        assert!(c.validate().is_err());
        assert!(c.set("seed", "x").is_err());
        assert!(c.set("json", "maybe").is_err());
    }
}
