//! Run configuration: a plain `key = value` file plus command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground_state::{Backend, SolveConfig};
use crate::oracle::{OracleConfig, KERNEL_FLOOR};
use crate::verifier::{default_p_values, VerifyConfig, NEAR_FLOOR, SIGN_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "text" | "text-table" | "table" => Ok(OutputFormat::Text),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Text => "text",
        })
    }
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Text => "txt",
        }
    }
}

/// Named floors that can be overridden with `tol.<name> = value`.
pub const TOLERANCE_NAMES: [&str; 4] = ["sign_floor", "near_floor", "kernel_floor", "benchmark_floor"];

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub p_values: Vec<f64>,
    /// `None`: start from 25 and extend until `Q(r_max) ≤ 1e-13`.
    pub r_max: Option<f64>,
    pub ode_step: f64,
    pub grid_n: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    pub output_format: OutputFormat,
    pub oracle_enabled: bool,
    pub backend: Backend,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solve = SolveConfig::default();
        let tolerances = [
            ("sign_floor", SIGN_FLOOR),
            ("near_floor", NEAR_FLOOR),
            ("kernel_floor", KERNEL_FLOOR),
            ("benchmark_floor", 1e-3),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        RunConfig {
            p_values: default_p_values(),
            r_max: None,
            ode_step: solve.ode_step,
            grid_n: solve.grid_n,
            tolerances,
            output_dir: PathBuf::from("zk-virial-out"),
            output_format: OutputFormat::Text,
            oracle_enabled: false,
            backend: Backend::Shooting,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?} as a number")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: cannot parse {other:?} as a boolean"))),
    }
}

pub fn parse_p_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64("p_list", s))
        .collect()
}

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "p" => self.p_values = vec![parse_f64("p", value)?],
            "p_list" | "p-list" => self.p_values = parse_p_list(value)?,
            "r_max" | "r-max" => {
                self.r_max = if value == "auto" { None } else { Some(parse_f64(key, value)?) }
            }
            "ode_step" | "ode-step" => self.ode_step = parse_f64(key, value)?,
            "grid_n" | "grid-n" => {
                self.grid_n = value
                    .parse()
                    .map_err(|_| Error::Config(format!("grid_n: cannot parse {value:?} as a count")))?
            }
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            "format" | "output_format" => self.output_format = value.parse()?,
            "oracle" | "oracle_enabled" => self.oracle_enabled = parse_bool(key, value)?,
            "backend" => self.backend = value.parse()?,
            other => match other.strip_prefix("tol.") {
                Some(name) if TOLERANCE_NAMES.contains(&name) => {
                    self.tolerances.insert(name.to_string(), parse_f64(other, value)?);
                }
                _ => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
            },
        }
        Ok(())
    }

    /// Parse a `key = value` file; `#` starts a comment.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file_contents(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_file_contents(text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p_values.iter().find(|&&p| !(p > 1.0 && p <= 3.0)) {
            return Err(Error::Config(format!("p = {p} is outside (1, 3]")));
        }
        if let Some(r) = self.r_max {
            if !(r >= 15.0 && r.is_finite()) {
                return Err(Error::Config(format!("r_max = {r} must be at least 15")));
            }
        }
        if !(self.ode_step > 0.0 && self.ode_step <= 0.01) {
            return Err(Error::Config(format!("ode_step = {} must lie in (0, 0.01]", self.ode_step)));
        }
        if self.grid_n < 3 || self.grid_n.is_multiple_of(2) {
            return Err(Error::Config(format!("grid_n = {} must be odd and at least 3", self.grid_n)));
        }
        for (k, v) in &self.tolerances {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {k} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn solve_config(&self) -> SolveConfig {
        let base = SolveConfig::default();
        SolveConfig {
            r_max: self.r_max.unwrap_or(base.r_max),
            extend_domain: self.r_max.is_none(),
            grid_n: self.grid_n,
            ode_step: self.ode_step,
            backend: self.backend,
            ..base
        }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            solve: self.solve_config(),
            sign_floor: self.tolerance("sign_floor"),
            near_floor: self.tolerance("near_floor"),
            ..VerifyConfig::default()
        }
    }

    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            kernel_floor: self.tolerance("kernel_floor"),
            ..OracleConfig::default()
        }
    }

    /// Every resolved setting as `key = value` lines, sorted by key.
    pub fn echo(&self) -> Vec<String> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        let list: Vec<String> = self.p_values.iter().map(|p| p.to_string()).collect();
        kv.insert("p_list".into(), list.join(","));
        kv.insert(
            "r_max".into(),
            self.r_max.map_or("auto".to_string(), |r| r.to_string()),
        );
        kv.insert("ode_step".into(), self.ode_step.to_string());
        kv.insert("grid_n".into(), self.grid_n.to_string());
        kv.insert("out".into(), self.output_dir.display().to_string());
        kv.insert("format".into(), self.output_format.to_string());
        kv.insert("oracle".into(), self.oracle_enabled.to_string());
        kv.insert(
            "backend".into(),
            match self.backend {
                Backend::Shooting => "shooting",
                Backend::Newton => "newton",
            }
            .into(),
        );
        for (k, v) in &self.tolerances {
            kv.insert(format!("tol.{k}"), format!("{v:e}"));
        }
        kv.into_iter().map(|(k, v)| format!("{k} = {v}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.p_values.len(), 20);
    }

    #[test]
    fn file_and_overrides() {
        let mut cfg = RunConfig::from_file_contents(
            "# comment\np_list = 3.0, 2.0 \ngrid_n = 4001\nformat = json\noracle = yes\ntol.sign_floor = 1e-13\n",
        )
        .unwrap();
        assert_eq!(cfg.p_values, vec![3.0, 2.0]);
        assert_eq!(cfg.grid_n, 4001);
        assert_eq!(cfg.output_format, OutputFormat::Json);
        assert!(cfg.oracle_enabled);
        assert_eq!(cfg.tolerance("sign_floor"), 1e-13);
        cfg.set("p", "2.5").unwrap();
        assert_eq!(cfg.p_values, vec![2.5]);
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        for (k, v) in [("grid_n", "4000"), ("r_max", "10"), ("ode_step", "0.02"), ("p", "3.5"), ("p", "1.0")] {
            let mut cfg = RunConfig::default();
            cfg.set(k, v).unwrap();
            assert!(cfg.validate().unwrap_err().is_config(), "{k} = {v}");
        }
        assert!(RunConfig::from_file_contents("nonsense").unwrap_err().is_config());
        assert!(RunConfig::from_file_contents("colour = red").unwrap_err().is_config());
        assert!(RunConfig::from_file_contents("format = xml").unwrap_err().is_config());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("p_list", "3,1.5").unwrap();
        cfg.set("r_max", "30").unwrap();
        let text = cfg.echo().join("\n");
        let back = RunConfig::from_file_contents(&text).unwrap();
        assert_eq!(back.echo(), cfg.echo());
    }

    #[test]
    fn explicit_r_max_disables_extension() {
        let mut cfg = RunConfig::default();
        assert!(cfg.solve_config().extend_domain);
        cfg.set("r_max", "40").unwrap();
        let s = cfg.solve_config();
        assert!(!s.extend_domain);
        assert_eq!(s.r_max, 40.0);
    }
}
