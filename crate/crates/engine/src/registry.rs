//! Builds core objects from config entries.

use abc_core::modelsel::ModelSpec;
use abc_core::simulators::{toys, Simulator, DEFAULT_STEP};
use abc_core::{Dataset, Marginal, ParamKernel, PriorSpec, Seed};

use crate::config::{ModelConfig, PriorDim, RunConfig};
use crate::error::{ConfigError, EngineError};

pub const DEFAULT_DECAY_X0: f64 = 10.0;
pub const DEFAULT_NOISE_SD: f64 = 0.1;
pub const DEFAULT_BIRTH_DEATH_X0: i64 = 10;
pub const DEFAULT_TRIALS: u32 = 5;

fn config_err(index: usize, key: &str, e: abc_core::Error) -> EngineError {
    ConfigError::new(format!("models[{index}].{key}"), e.to_string()).into()
}

pub fn build_prior(index: usize, model: &ModelConfig) -> Result<PriorSpec, EngineError> {
    let dims = model
        .prior
        .iter()
        .map(|p| match p {
            PriorDim::Uniform([lo, hi]) => Marginal::Uniform { lo: *lo, hi: *hi },
            PriorDim::Grid(g) => Marginal::Discrete(g.clone()),
        })
        .collect();
    PriorSpec::new(dims).map_err(|e| config_err(index, "prior", e))
}

pub fn build_simulator(
    index: usize,
    model: &ModelConfig,
) -> Result<Box<dyn Simulator>, EngineError> {
    let o = &model.options;
    let sim: Box<dyn Simulator> = match model.simulator.as_str() {
        "decay" => Box::new(
            toys::decay(
                o.x0.unwrap_or(DEFAULT_DECAY_X0),
                o.noise_sd.unwrap_or(DEFAULT_NOISE_SD),
                o.step.unwrap_or(DEFAULT_STEP),
            )
            .map_err(|e| config_err(index, "options", e))?,
        ),
        "birth-death" => Box::new(
            toys::birth_death(o.x0.map_or(DEFAULT_BIRTH_DEATH_X0, |x| x as i64))
                .map_err(|e| config_err(index, "options", e))?,
        ),
        "bernoulli" => {
            let grid = match &model.prior[0] {
                PriorDim::Grid(g) => g.clone(),
                PriorDim::Uniform(_) => toys::decile_grid(),
            };
            Box::new(
                toys::bernoulli(o.trials.unwrap_or(DEFAULT_TRIALS), grid)
                    .map_err(|e| config_err(index, "options", e))?,
            )
        }
        other => {
            return Err(ConfigError::new(
                format!("models[{index}].simulator"),
                format!("unknown simulator `{other}`"),
            )
            .into())
        }
    };
    Ok(sim)
}

/// The model's perturbation kernel; rejection runs without `kernel_sd` get a
/// unit-scale placeholder that is never used.
pub fn build_kernel(index: usize, model: &ModelConfig) -> Result<ParamKernel, EngineError> {
    let sigmas = model
        .kernel_sd
        .clone()
        .unwrap_or_else(|| vec![1.0; model.prior.len()]);
    ParamKernel::new(sigmas, model.reflect).map_err(|e| config_err(index, "kernel_sd", e))
}

pub fn build_models(config: &RunConfig) -> Result<Vec<ModelSpec>, EngineError> {
    config
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| {
            Ok(ModelSpec {
                name: m.label(i),
                simulator: build_simulator(i, m)?,
                kernel: build_kernel(i, m)?,
            })
        })
        .collect()
}

/// Observed data: given values, or one simulation of a chosen model from
/// its own seed (generation 0 is reserved for this draw).
pub fn build_observed(config: &RunConfig, models: &[ModelSpec]) -> Result<Dataset, EngineError> {
    let data = &config.data;
    if let Some(values) = &data.values {
        return Dataset::from_rows(data.times.clone(), values)
            .map_err(|e| ConfigError::new("data", e.to_string()).into());
    }
    let synthetic = data
        .synthetic
        .as_ref()
        .ok_or_else(|| ConfigError::new("data", "either values or synthetic is required"))?;
    let model = models
        .get(synthetic.model)
        .ok_or_else(|| ConfigError::new("data.synthetic.model", "no such model"))?;
    let mut rng = Seed(synthetic.seed).stream(0, 0);
    Ok(model
        .simulator
        .simulate(&synthetic.theta, &data.times, &mut rng)?)
}
