use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use tilepress_core::cells::EdgeLabel;
use tilepress_core::ldp::default_t_grid;
use tilepress_core::thermo::OperatorConfig;
use tilepress_core::{MapSpec, OneTileLabel, Potential, Subsystem};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapConfig,
    #[serde(default)]
    pub subsystem: SubsystemConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub levels: LevelsConfig,
    #[serde(default)]
    pub ldp: LdpConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub m: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsystemKind {
    #[default]
    Full,
    Carpet,
}

/// `"full"`, `"carpet"`, or an explicit list of one-tile labels such as
/// `["w0-0", "b1-2"]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubsystemConfig {
    Named(SubsystemKind),
    Labels(Vec<String>),
}

impl Default for SubsystemConfig {
    fn default() -> Self {
        SubsystemConfig::Named(SubsystemKind::Full)
    }
}

/// Coefficients on the potential basis; omitted entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos_cos: f64,
    #[serde(default)]
    pub cos_x: f64,
    #[serde(default)]
    pub cos_y: f64,
    #[serde(default)]
    pub signed_sine: f64,
    #[serde(default)]
    pub signed_bubble: f64,
    #[serde(default = "one")]
    pub kappa: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { constant: 0.0, cos_cos: 0.0, cos_x: 0.0, cos_y: 0.0, signed_sine: 0.0, signed_bubble: 0.0, kappa: 1.0 }
    }
}

impl PotentialConfig {
    pub fn coefficients(&self) -> [f64; 6] {
        [self.constant, self.cos_cos, self.cos_x, self.cos_y, self.signed_sine, self.signed_bubble]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "G")]
    pub g: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let d = OperatorConfig::default();
        Self { g: d.grid, tol: d.tol, max_iter: d.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelsConfig {
    pub n_max: u32,
    pub capacity: u64,
}

impl Default for LevelsConfig {
    fn default() -> Self {
        Self { n_max: 5, capacity: tilepress_core::cells::DEFAULT_CAPACITY as u64 }
    }
}

/// `"default"` or an explicit sorted list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TGrid {
    Named(DefaultTag),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefaultTag {
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdpConfig {
    pub t_grid: TGrid,
    /// Explicit deviation levels; when empty, `alpha_count` evenly spaced
    /// values inside the estimated range are used for the rate table.
    #[serde(default)]
    pub alphas: Vec<f64>,
    pub alpha_count: usize,
    pub e0: EdgeLabel,
    pub n_range: [u32; 2],
}

impl Default for LdpConfig {
    fn default() -> Self {
        Self { t_grid: TGrid::Named(DefaultTag::Default), alphas: Vec::new(), alpha_count: 20, e0: EdgeLabel::Bottom, n_range: [3, 7] }
    }
}

impl LdpConfig {
    pub fn t_values(&self) -> Vec<f64> {
        match &self.t_grid {
            TGrid::Named(DefaultTag::Default) => default_t_grid(),
            TGrid::Values(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("tilepress-out"), formats: vec![Format::Csv, Format::Json] }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn invalid(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Invalid { key: key.to_string(), message: msg.into() }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        MapSpec::new(self.map.m).map_err(|e| invalid("map.m", e.to_string()))?;
        let p = &self.potential;
        if p.coefficients().iter().any(|c| !c.is_finite()) {
            return Err(invalid("potential", "coefficients must be finite"));
        }
        if !(p.kappa > 0.0 && p.kappa <= 1.0) {
            return Err(invalid("potential.kappa", "must lie in (0, 1]"));
        }
        if self.grid.g < 2 {
            return Err(invalid("grid.G", "must be at least 2"));
        }
        if self.grid.tol.is_nan() || self.grid.tol <= 0.0 {
            return Err(invalid("grid.tol", "must be positive"));
        }
        if self.grid.max_iter == 0 {
            return Err(invalid("grid.max_iter", "must be positive"));
        }
        if self.levels.n_max == 0 {
            return Err(invalid("levels.n_max", "must be positive"));
        }
        if self.levels.capacity == 0 {
            return Err(invalid("levels.capacity", "must be positive"));
        }
        let t = self.ldp.t_values();
        if t.len() < 3 || t.iter().any(|v| v.is_nan()) || t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("ldp.t_grid", "needs at least three strictly increasing values"));
        }
        if !t.contains(&1.0) {
            return Err(invalid("ldp.t_grid", "must contain t = 1"));
        }
        if t.iter().any(|v| v.abs() > tilepress_core::ldp::T_MAX) {
            return Err(invalid("ldp.t_grid", format!("values must satisfy |t| <= {}", tilepress_core::ldp::T_MAX)));
        }
        if self.ldp.alphas.is_empty() && self.ldp.alpha_count == 0 {
            return Err(invalid("ldp.alpha_count", "must be positive when no alphas are given"));
        }
        if self.ldp.alphas.iter().any(|a| !a.is_finite()) {
            return Err(invalid("ldp.alphas", "values must be finite"));
        }
        let [lo, hi] = self.ldp.n_range;
        if lo == 0 || lo > hi {
            return Err(invalid("ldp.n_range", "must be [lo, hi] with 1 <= lo <= hi"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "must list at least one format"));
        }
        self.subsystem()?;
        Ok(())
    }

    pub fn spec(&self) -> MapSpec {
        MapSpec::new(self.map.m).expect("validated")
    }

    pub fn subsystem(&self) -> Result<Subsystem, CliError> {
        let spec = MapSpec::new(self.map.m).map_err(|e| invalid("map.m", e.to_string()))?;
        match &self.subsystem {
            SubsystemConfig::Named(SubsystemKind::Full) => Ok(Subsystem::full(spec)),
            SubsystemConfig::Named(SubsystemKind::Carpet) => {
                Subsystem::carpet(spec).map_err(|e| invalid("subsystem", e.to_string()))
            }
            SubsystemConfig::Labels(list) => {
                let labels = list
                    .iter()
                    .map(|s| {
                        let l: OneTileLabel = s.parse().map_err(|e: tilepress_core::Error| invalid("subsystem", e.to_string()))?;
                        if l.is_valid_for(spec) {
                            Ok(l)
                        } else {
                            Err(invalid("subsystem", format!("label {s} is out of range for m = {}", spec.m())))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Subsystem::new(spec, labels).map_err(|e| invalid("subsystem", e.to_string()))
            }
        }
    }

    pub fn potential(&self) -> Potential {
        Potential::new(self.potential.coefficients(), self.potential.kappa).expect("validated")
    }

    pub fn operator(&self) -> OperatorConfig {
        OperatorConfig { grid: self.grid.g, tol: self.grid.tol, max_iter: self.grid.max_iter }
    }

    pub fn capacity(&self) -> u128 {
        self.levels.capacity as u128
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = RunConfig::from_json(r#"{"map": {"m": 3}}"#).unwrap();
        assert_eq!(c.grid.g, 257);
        assert_eq!(c.ldp.t_values().len(), 21);
        assert_eq!(c.subsystem().unwrap().len(), 18);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = RunConfig::from_json("{\n  \"map\": {\"m\": 3},\n  \"colour\": 1\n}").unwrap_err();
        match err {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn label_lists_and_bounds() {
        let c = RunConfig::from_json(r#"{"map": {"m": 2}, "subsystem": ["w0-0", "b1-1"]}"#).unwrap();
        assert_eq!(c.subsystem().unwrap().len(), 2);
        assert!(RunConfig::from_json(r#"{"map": {"m": 2}, "subsystem": ["w5-0"]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"map": {"m": 2}, "subsystem": "carpet"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"map": {"m": 3}, "grid": {"G": 1, "tol": 1e-8, "max_iter": 5}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"map": {"m": 1}}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"{"map": {"m": 3}, "subsystem": "carpet", "potential": {"signed_sine": 0.3, "kappa": 0.5},
            "ldp": {"t_grid": [-1, 0, 1, 2], "alphas": [0.1], "alpha_count": 3, "e0": "left", "n_range": [2, 4]}}"#;
        let a = RunConfig::from_json(text).unwrap();
        let b = RunConfig::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }
}
