//! Run configuration: a TOML file (or the equivalent JSON object).
//!
//! ```toml
//! algorithm = "smc"              # reject | smc | reject-joint | smc-joint
//! distance = "euclidean"         # euclidean | sumsq
//! n = 1000
//! seed = 42
//! workers = 1
//! max_attempts = 10000000        # per generation
//! schedule = [2.0, 1.0, 0.5]     # smc, smc-joint
//! # epsilon = 0.5                # reject, reject-joint
//! stay_prob = 0.7                # model kernel, smc-joint
//! bins = 10                      # histogram bins per parameter
//! output = "out"
//!
//! [data]
//! times = [0.5, 1.0, 1.5]
//! values = [[6.1], [3.7], [2.2]] # or: synthetic = { model = 0, theta = [1.0], seed = 7 }
//!
//! [[models]]
//! name = "decay"
//! simulator = "decay"            # decay | birth-death | bernoulli
//! prior = [{ uniform = [0.0, 10.0] }]   # or { grid = [0.1, 0.2] }
//! kernel_sd = [0.5]
//! reflect = true
//! # prior_prob = 0.5             # model prior mass; all or none
//! options = { x0 = 10.0, noise_sd = 0.1, step = 0.001 }
//! ```

use std::fmt;

use abc_core::distance::DistanceKind;
use abc_core::inference::DEFAULT_MAX_ATTEMPTS;
use abc_core::schedule::validate_schedule;
use abc_core::simulators::toys;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const DEFAULT_STAY_PROB: f64 = 0.7;
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Reject,
    Smc,
    RejectJoint,
    SmcJoint,
}

impl Algorithm {
    pub fn is_joint(self) -> bool {
        matches!(self, Self::RejectJoint | Self::SmcJoint)
    }

    pub fn uses_schedule(self) -> bool {
        matches!(self, Self::Smc | Self::SmcJoint)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Reject => "reject",
            Self::Smc => "smc",
            Self::RejectJoint => "reject-joint",
            Self::SmcJoint => "smc-joint",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PriorDim {
    Uniform([f64; 2]),
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulatorOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
}

impl SimulatorOptions {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub simulator: String,
    pub prior: Vec<PriorDim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_sd: Option<Vec<f64>>,
    #[serde(default = "yes")]
    pub reflect: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "SimulatorOptions::is_empty")]
    pub options: SimulatorOptions,
}

impl ModelConfig {
    pub fn label(&self, index: usize) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("m{}", index + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticData {
    #[serde(default)]
    pub model: usize,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    #[serde(default = "default_distance")]
    pub distance: String,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_budget")]
    pub max_attempts: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default = "default_stay_prob")]
    pub stay_prob: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_output")]
    pub output: String,
    pub data: DataConfig,
    pub models: Vec<ModelConfig>,
}

fn yes() -> bool {
    true
}

fn default_distance() -> String {
    "euclidean".into()
}

fn default_workers() -> usize {
    1
}

fn default_budget() -> u64 {
    DEFAULT_MAX_ATTEMPTS
}

fn default_stay_prob() -> f64 {
    DEFAULT_STAY_PROB
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

fn default_output() -> String {
    "abc-output".into()
}

/// Parses and validates a config. Text starting with `{` is read as JSON.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| ConfigError::syntax(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| ConfigError::syntax(e.to_string()))?
    };
    config.validate()?;
    Ok(config)
}

/// Renders a config as TOML that [`parse_config`] reads back unchanged.
pub fn render_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("config serializes to TOML")
}

pub fn render_config_json(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes to JSON")
}

fn err(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::new(path, message)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if DistanceKind::from_name(&self.distance).is_none() {
            return Err(err(
                "distance",
                format!(
                    "unknown distance `{}`; available: {}",
                    self.distance,
                    DistanceKind::NAMES.join(", ")
                ),
            ));
        }
        let min_n = if self.algorithm.uses_schedule() { 2 } else { 1 };
        if self.n < min_n {
            return Err(err("n", format!("must be at least {min_n}")));
        }
        if self.workers == 0 {
            return Err(err("workers", "must be at least 1"));
        }
        if self.max_attempts == 0 || self.max_attempts > abc_core::stochastics::MAX_PROPOSALS {
            return Err(err("max_attempts", "must lie in 1..=2^40"));
        }
        if self.bins == 0 {
            return Err(err("bins", "must be at least 1"));
        }
        if !(self.stay_prob > 0.0 && self.stay_prob <= 1.0) {
            return Err(err("stay_prob", "must lie in (0, 1]"));
        }

        if self.algorithm.uses_schedule() {
            let schedule = self
                .schedule
                .as_ref()
                .ok_or_else(|| err("schedule", format!("required by `{}`", self.algorithm)))?;
            validate_schedule(schedule).map_err(|e| err("schedule", e.to_string()))?;
            if self.epsilon.is_some() {
                return Err(err(
                    "epsilon",
                    format!("not used by `{}`; use schedule", self.algorithm),
                ));
            }
        } else {
            let epsilon = self
                .epsilon
                .ok_or_else(|| err("epsilon", format!("required by `{}`", self.algorithm)))?;
            if !(epsilon >= 0.0) {
                return Err(err("epsilon", "must be >= 0"));
            }
            if self.schedule.is_some() {
                return Err(err(
                    "schedule",
                    format!("not used by `{}`; use epsilon", self.algorithm),
                ));
            }
        }

        if self.models.is_empty() {
            return Err(err("models", "at least one model is required"));
        }
        if !self.algorithm.is_joint() && self.models.len() != 1 {
            return Err(err(
                "models",
                format!("`{}` takes exactly one model", self.algorithm),
            ));
        }
        let with_prob = self
            .models
            .iter()
            .filter(|m| m.prior_prob.is_some())
            .count();
        if with_prob != 0 && with_prob != self.models.len() {
            return Err(err("models", "set prior_prob on every model or on none"));
        }
        for (i, model) in self.models.iter().enumerate() {
            self.validate_model(i, model)?;
        }
        let mut labels: Vec<String> = self
            .models
            .iter()
            .enumerate()
            .map(|(i, m)| m.label(i))
            .collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(err("models", "model names must be distinct"));
        }

        self.validate_data()
    }

    fn validate_model(&self, i: usize, model: &ModelConfig) -> Result<(), ConfigError> {
        let path = |key: &str| format!("models[{i}].{key}");
        let dim = match model.simulator.as_str() {
            "decay" => 1,
            "birth-death" => 2,
            "bernoulli" => 1,
            other => {
                return Err(err(
                    path("simulator"),
                    format!(
                        "unknown simulator `{other}`; available: {}",
                        toys::NAMES.join(", ")
                    ),
                ))
            }
        };
        if model.prior.len() != dim {
            return Err(err(
                path("prior"),
                format!(
                    "`{}` has {dim} parameter(s), prior has {}",
                    model.simulator,
                    model.prior.len()
                ),
            ));
        }
        for (j, p) in model.prior.iter().enumerate() {
            let bad = match p {
                PriorDim::Uniform([lo, hi]) => !lo.is_finite() || !hi.is_finite() || lo > hi,
                PriorDim::Grid(g) => g.is_empty() || g.iter().any(|v| !v.is_finite()),
            };
            if bad {
                return Err(err(
                    format!("models[{i}].prior[{j}]"),
                    "invalid prior dimension",
                ));
            }
        }
        if let Some(p) = model.prior_prob {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(err(path("prior_prob"), "must be a non-negative number"));
            }
        }
        if self.algorithm.uses_schedule() {
            let sd = model.kernel_sd.as_ref().ok_or_else(|| {
                err(
                    path("kernel_sd"),
                    format!("required by `{}`", self.algorithm),
                )
            })?;
            if sd.len() != dim {
                return Err(err(path("kernel_sd"), format!("expected {dim} scale(s)")));
            }
            if sd.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                return Err(err(path("kernel_sd"), "scales must be positive"));
            }
            if model.prior.iter().any(|p| matches!(p, PriorDim::Grid(_)))
                && self.schedule.as_ref().is_some_and(|s| s.len() > 1)
            {
                return Err(err(
                    path("prior"),
                    "SMC perturbation needs uniform prior dimensions",
                ));
            }
        }
        let o = &model.options;
        let allowed: &[&str] = match model.simulator.as_str() {
            "decay" => &["x0", "noise_sd", "step"],
            "birth-death" => &["x0"],
            _ => &["trials"],
        };
        for (key, set) in [
            ("x0", o.x0.is_some()),
            ("noise_sd", o.noise_sd.is_some()),
            ("step", o.step.is_some()),
            ("trials", o.trials.is_some()),
        ] {
            if set && !allowed.contains(&key) {
                return Err(err(
                    format!("models[{i}].options.{key}"),
                    format!("does not apply to simulator `{}`", model.simulator),
                ));
            }
        }
        if let Some(x0) = o.x0 {
            let integral = model.simulator != "birth-death" || (x0 >= 0.0 && x0.fract() == 0.0);
            if !x0.is_finite() || !integral {
                return Err(err(
                    format!("models[{i}].options.x0"),
                    "invalid initial state",
                ));
            }
        }
        if o.noise_sd.is_some_and(|s| !(s >= 0.0) || !s.is_finite()) {
            return Err(err(format!("models[{i}].options.noise_sd"), "must be >= 0"));
        }
        if o.step.is_some_and(|s| !(s > 0.0) || !s.is_finite()) {
            return Err(err(format!("models[{i}].options.step"), "must be positive"));
        }
        if model.simulator == "bernoulli" {
            match &model.prior[0] {
                PriorDim::Grid(g) if g.iter().all(|p| (0.0..=1.0).contains(p)) => {}
                _ => {
                    return Err(err(
                        path("prior"),
                        "`bernoulli` needs a grid prior of probabilities",
                    ))
                }
            }
        }
        Ok(())
    }

    fn validate_data(&self) -> Result<(), ConfigError> {
        let d = &self.data;
        if d.times.windows(2).any(|w| !(w[0] < w[1])) || d.times.iter().any(|t| !(*t >= 0.0)) {
            return Err(err(
                "data.times",
                "must be non-negative and strictly increasing",
            ));
        }
        if d.times.is_empty() {
            return Err(err(
                "data.times",
                "at least one observation time is required",
            ));
        }
        match (&d.values, &d.synthetic) {
            (Some(_), Some(_)) => Err(err("data", "give either values or synthetic, not both")),
            (None, None) => Err(err("data", "either values or synthetic is required")),
            (Some(values), None) => {
                if values.len() != d.times.len() {
                    return Err(err("data.values", "one row per observation time"));
                }
                let width = values[0].len();
                if width == 0 || values.iter().any(|r| r.len() != width) {
                    return Err(err(
                        "data.values",
                        "rows must be non-empty and equally long",
                    ));
                }
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(err("data.values", "entries must be finite"));
                }
                Ok(())
            }
            (None, Some(s)) => {
                let Some(model) = self.models.get(s.model) else {
                    return Err(err("data.synthetic.model", "no such model"));
                };
                if s.theta.len() != model.prior.len() {
                    return Err(err(
                        "data.synthetic.theta",
                        format!("expected {} value(s)", model.prior.len()),
                    ));
                }
                Ok(())
            }
        }
    }
}
