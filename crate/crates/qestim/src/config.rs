//! Sweep configuration files.
//!
//! The format is `key = value` lines grouped under `[section]` headers, with
//! `#` comment lines:
//!
//! ```text
//! [model]
//! kind = noon
//! visibility = 0.9
//!
//! [experiment]
//! phi = 0.2
//! measurements = log(10, 450, 25)
//! repetitions = 500
//! betas = 2, 3, 4, 5
//! seed = 20200202
//!
//! [grid]
//! points = 2048
//! ```
//!
//! `measurements` is either a comma-separated list or `log(lo, hi, count)`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qestim_core::bayes::ParameterGrid;
use qestim_core::montecarlo::{log_spaced_counts, ExperimentConfig};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::models::{ModelSettings, ModelSpec};

const KEYS: &[(&str, &[&str])] = &[
    ("model", &["kind", "visibility", "feedback_phase"]),
    (
        "experiment",
        &["phi", "measurements", "repetitions", "betas", "seed"],
    ),
    ("grid", &["points"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigFile {
    entries: Vec<Entry>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or((line, "unterminated section header".to_string()))?
                    .trim();
                if !KEYS.iter().any(|(sec, _)| *sec == name) {
                    return Err((line, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .ok_or((line, format!("expected `key = value`, got {s:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .as_deref()
                .ok_or((line, format!("key {key:?} outside of any section")))?;
            let known = KEYS
                .iter()
                .find(|(s, _)| *s == sec)
                .map_or(&[][..], |(_, k)| *k);
            if !known.contains(&key) {
                return Err((line, format!("unknown key {key:?} in [{sec}]")));
            }
            if value.is_empty() {
                return Err((line, format!("empty value for {key:?}")));
            }
            if let Some(prev) = entries.iter().find(|e| e.section == sec && e.key == key) {
                return Err((
                    line,
                    format!("duplicate key {key:?} (first set on line {})", prev.line),
                ));
            }
            entries.push(Entry {
                section: sec.to_string(),
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
        Ok(Self { entries })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries
            .iter()
            .find(|e| e.section == section && e.key == key)
    }
}

fn parse_value<T: FromStr>(e: &Entry) -> Result<T, (usize, String)> {
    e.value.parse().map_err(|_| {
        (
            e.line,
            format!("invalid value {:?} for {:?}", e.value, e.key),
        )
    })
}

fn parse_list<T: FromStr>(e: &Entry) -> Result<Vec<T>, (usize, String)> {
    e.value
        .split(',')
        .map(|t| {
            t.trim().parse().map_err(|_| {
                (
                    e.line,
                    format!("invalid list item {:?} for {:?}", t.trim(), e.key),
                )
            })
        })
        .collect()
}

pub fn parse_measurements(value: &str) -> Result<Vec<usize>, String> {
    if let Some(args) = value.strip_prefix("log(").and_then(|v| v.strip_suffix(')')) {
        let parts: Vec<usize> = args
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| format!("invalid log() argument {:?}", t.trim()))
            })
            .collect::<Result<_, _>>()?;
        return match parts[..] {
            [lo, hi, count] if lo >= 1 && hi >= lo && count >= 1 => {
                Ok(log_spaced_counts(lo, hi, count))
            }
            _ => Err("log(lo, hi, count) needs 1 <= lo <= hi and count >= 1".into()),
        };
    }
    value
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| format!("invalid measurement count {:?}", t.trim()))
        })
        .collect()
}

/// Fully resolved sweep settings; echoed into the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub model: String,
    pub visibility: f64,
    pub feedback_phase: f64,
    pub phi: f64,
    pub measurements: Vec<usize>,
    pub repetitions: usize,
    pub betas: Vec<f64>,
    pub seed: u64,
    pub grid_points: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        let reference = ExperimentConfig::noon_reference();
        let model = ModelSettings::default();
        Self {
            model: ModelSpec::Noon.to_string(),
            visibility: model.visibility,
            feedback_phase: model.feedback_phase,
            phi: reference.truth,
            measurements: reference.measurements,
            repetitions: reference.repetitions,
            betas: reference.betas,
            seed: reference.seed,
            grid_points: reference.grid.len(),
        }
    }
}

impl SweepSettings {
    /// Missing keys keep their [`Default`] values.
    pub fn from_config(cfg: &ConfigFile) -> Result<Self, (usize, String)> {
        let mut s = Self::default();
        if let Some(e) = cfg.get("model", "kind") {
            let spec: ModelSpec = e.value.parse().map_err(|m| (e.line, m))?;
            if spec == ModelSpec::Noon2 {
                return Err((e.line, "sweeps need a single-parameter model".into()));
            }
            s.model = spec.to_string();
        }
        if let Some(e) = cfg.get("model", "visibility") {
            s.visibility = parse_value(e)?;
        }
        if let Some(e) = cfg.get("model", "feedback_phase") {
            s.feedback_phase = parse_value(e)?;
        }
        if let Some(e) = cfg.get("experiment", "phi") {
            s.phi = parse_value(e)?;
        }
        if let Some(e) = cfg.get("experiment", "measurements") {
            s.measurements = parse_measurements(&e.value).map_err(|m| (e.line, m))?;
            if s.measurements.contains(&0) {
                return Err((e.line, "measurement counts must be at least 1".into()));
            }
        }
        if let Some(e) = cfg.get("experiment", "repetitions") {
            s.repetitions = parse_value(e)?;
            if s.repetitions == 0 {
                return Err((e.line, "repetitions must be at least 1".into()));
            }
        }
        if let Some(e) = cfg.get("experiment", "betas") {
            s.betas = parse_list(e)?;
            if let Some(b) = s.betas.iter().find(|&&b| !(b > 1.0 && b.is_finite())) {
                return Err((
                    e.line,
                    format!("moment order {b} must be finite and greater than 1"),
                ));
            }
        }
        if let Some(e) = cfg.get("experiment", "seed") {
            s.seed = parse_value(e)?;
        }
        if let Some(e) = cfg.get("grid", "points") {
            s.grid_points = parse_value(e)?;
            if s.grid_points < 3 {
                return Err((e.line, "grid needs at least 3 points".into()));
            }
        }
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(CliError::file(path))?;
        let config_error = |(line, message)| CliError::Config {
            path: PathBuf::from(path),
            line,
            message,
        };
        let cfg = ConfigFile::parse(&text).map_err(config_error)?;
        Self::from_config(&cfg).map_err(config_error)
    }

    pub fn model_spec(&self) -> ModelSpec {
        self.model.parse().expect("validated on construction")
    }

    pub fn model_settings(&self) -> ModelSettings {
        ModelSettings {
            visibility: self.visibility,
            feedback_phase: self.feedback_phase,
        }
    }

    pub fn experiment(&self, grid: ParameterGrid) -> ExperimentConfig {
        ExperimentConfig {
            truth: self.phi,
            measurements: self.measurements.clone(),
            repetitions: self.repetitions,
            betas: self.betas.clone(),
            seed: self.seed,
            grid,
        }
    }
}
