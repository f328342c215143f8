//! Experiment configuration: scenario defaults, then a JSON file, then flags.

use std::path::Path;

use lane_emden_core::flow::Controls;
use lane_emden_core::mild::PicardOptions;
use lane_emden_core::Profile;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub radius: f64,
    pub cells: usize,
    pub grading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "kebab-case")]
pub enum ProfileKind {
    Power,
    Bubble,
    CustomCsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub kind: ProfileKind,
    pub amp: f64,
    /// Power-law exponent; `null` means `α = 2/(p-2)`.
    pub exponent: Option<f64>,
    /// Bubble support radius.
    pub support: f64,
    /// Two-column CSV `r,value` for `custom_csv`.
    pub path: Option<String>,
}

/// Everything a scenario reads. Fields a scenario does not use are still echoed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub p: f64,
    pub n: usize,
    pub grid: GridConfig,
    pub profile: ProfileConfig,
    pub controls: Controls,
    pub picard: PicardOptions,
    pub seed: u64,
    /// Flow horizon for `simulate`.
    pub horizon: f64,
    /// Picard interval `[0, T]`.
    pub t_end: f64,
    /// Morrey exponent `q` and weight `λ` (`null`: `2α`).
    pub q: f64,
    pub lambda: Option<f64>,
    /// Monte-Carlo samples per (center, radius) for the off-center Morrey oracle.
    pub samples: usize,
    /// Output times for `decay`.
    pub times: Vec<f64>,
    /// Amplitudes for the Picard bound check.
    pub amps: Vec<f64>,
    /// Bisection bracket for `scan-eps`.
    pub c_lo: f64,
    pub c_hi: f64,
    /// Rescaling factors and comparison time for `scaling`.
    pub factors: Vec<f64>,
    pub t_check: f64,
    pub levels: Vec<f64>,
    pub t_small: f64,
    /// Horizon of the untruncated run in the classification.
    pub classify_horizon: f64,
    /// Probe radii as fractions of the domain radius.
    pub probes: Vec<f64>,
    pub c_grid: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: String::new(),
            p: 4.0,
            n: 5,
            grid: GridConfig {
                radius: 1.0,
                cells: 1000,
                grading: 2.0,
            },
            profile: ProfileConfig {
                kind: ProfileKind::Power,
                amp: 1.0,
                exponent: None,
                support: 1.0,
                path: None,
            },
            controls: Controls::default(),
            picard: PicardOptions::default(),
            seed: 0,
            horizon: 0.1,
            t_end: 0.1,
            q: 2.0,
            lambda: None,
            samples: 4096,
            times: (0..=12).map(|k| 1e-4 * 10f64.powf(k as f64 / 4.0)).collect(),
            amps: vec![0.01, 0.02, 0.05],
            c_lo: 0.05,
            c_hi: 5.0,
            factors: vec![0.5, 0.25],
            t_check: 0.002,
            levels: vec![16.0, 64.0, 256.0],
            t_small: 0.01,
            classify_horizon: 10.0,
            probes: vec![0.25, 0.5, 0.75],
            c_grid: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0],
        }
    }
}

impl ExperimentConfig {
    /// Defaults with the scenario's own data choices applied.
    pub fn defaults_for(scenario: &str) -> Self {
        let mut c = ExperimentConfig {
            name: scenario.to_string(),
            ..ExperimentConfig::default()
        };
        match scenario {
            "simulate" | "ball-blowup" => {
                c.profile.kind = ProfileKind::Bubble;
                c.profile.amp = 12.0;
                c.controls.dt_max = 1e-4;
            }
            "scaling" => {
                c.profile.kind = ProfileKind::Bubble;
                c.profile.amp = 12.0;
                c.controls.dt_max = 5e-6;
            }
            "picard" => c.profile.amp = 0.05,
            "minimal" => c.profile.amp = 5.0,
            _ => {}
        }
        c
    }

    /// Scenario defaults overlaid with the JSON object in `path`, key by key.
    pub fn load(scenario: &str, path: Option<&Path>) -> Result<Self, LabError> {
        let base = ExperimentConfig::defaults_for(scenario);
        let Some(path) = path else {
            return Ok(base);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let mut merged = serde_json::to_value(&base).expect("config serializes");
        merge(&mut merged, file);
        serde_json::from_value(merged).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    pub fn profile(&self) -> Result<Profile, LabError> {
        let alpha = 2.0 / (self.p - 2.0);
        let pc = &self.profile;
        Ok(match pc.kind {
            ProfileKind::Power => Profile::Power {
                amp: pc.amp,
                exponent: pc.exponent.unwrap_or(alpha),
            },
            ProfileKind::Bubble => Profile::Bubble {
                amp: pc.amp,
                support: pc.support,
            },
            ProfileKind::CustomCsv => {
                let path = pc
                    .path
                    .as_deref()
                    .ok_or_else(|| LabError::Config("profile.path is required for custom_csv".into()))?;
                let (radii, values) = read_profile_csv(Path::new(path))?;
                Profile::Tabulated { radii, values }.scaled(pc.amp)
            }
        })
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), LabError> {
    let bad = |e: &dyn std::fmt::Display| LabError::Config(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.deserialize::<(f64, f64)>() {
        let (r, v) = rec.map_err(|e| bad(&e))?;
        radii.push(r);
        values.push(v);
    }
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad(&"need at least two rows with increasing r"));
    }
    Ok((radii, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let c = ExperimentConfig::defaults_for("minimal");
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn file_overrides_nested_keys_only() {
        let dir = std::env::temp_dir().join(format!("lane-emden-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"p": 5.0, "grid": {"cells": 200}}"#).unwrap();
        let c = ExperimentConfig::load("simulate", Some(&path)).unwrap();
        assert_eq!(c.p, 5.0);
        assert_eq!(c.grid.cells, 200);
        assert_eq!(c.grid.grading, 2.0);
        assert_eq!(c.profile.amp, 12.0);
        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        assert!(matches!(ExperimentConfig::load("simulate", Some(&path)), Err(LabError::Config(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
