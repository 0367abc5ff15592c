use std::time::Instant;

use abc_core::distance::DistanceKind;
use abc_core::inference::{abc_reject, abc_smc, Problem};
use abc_core::modelsel::{abc_reject_joint, abc_smc_joint, JointProblem, ModelMarginals, ModelSet};
use abc_core::{JointPrior, ModelKernel, Population, Seed, ToleranceSchedule};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{render_config, Algorithm, RunConfig};
use crate::error::{ConfigError, EngineError};
use crate::executor::ThreadedExecutor;
use crate::registry::{build_models, build_observed, build_prior};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub algorithm: String,
    pub seed: u64,
    pub n: usize,
    pub workers: usize,
    pub epsilons: Vec<f64>,
    pub attempts: Vec<u64>,
    pub simulations: Vec<u64>,
    pub total_simulations: u64,
    pub wall_time_secs: f64,
    pub config_sha256: String,
}

/// Everything a run produced, ready for [`crate::output::emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub joint: bool,
    pub model_names: Vec<String>,
    /// Histogram range per model and parameter (the prior's support).
    pub param_ranges: Vec<Vec<(f64, f64)>>,
    pub bins: usize,
    pub populations: Vec<Population>,
    pub marginals: Option<ModelMarginals>,
    pub metadata: RunMetadata,
}

pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(render_config(config).as_bytes()))
}

/// Runs the configured algorithm. Output is a function of the config alone;
/// the worker count only changes wall time.
pub fn run(config: &RunConfig) -> Result<ResultBundle, EngineError> {
    config.validate()?;
    let started = Instant::now();
    let exec = ThreadedExecutor::new(config.workers)
        .map_err(|e| ConfigError::new("workers", e.to_string()))?;
    let distance = DistanceKind::from_name(&config.distance)
        .ok_or_else(|| ConfigError::new("distance", "unknown distance"))?;
    let seed = Seed(config.seed);
    let priors = config
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| build_prior(i, m))
        .collect::<Result<Vec<_>, _>>()?;
    let param_ranges = priors
        .iter()
        .map(|p| p.marginals().iter().map(|m| m.bounds()).collect())
        .collect();
    let models = build_models(config)?;
    let model_names = models.iter().map(|m| m.name.clone()).collect();
    let observed = build_observed(config, &models)?;
    let schedule = || {
        ToleranceSchedule::new(config.schedule.clone().unwrap_or_default())
            .map_err(|e| EngineError::from(ConfigError::new("schedule", e.to_string())))
    };

    let (populations, marginals) = match config.algorithm {
        Algorithm::Reject | Algorithm::Smc => {
            let problem = Problem {
                simulator: models[0].simulator.as_ref(),
                prior: &priors[0],
                observed: &observed,
                distance: &distance,
            };
            if config.algorithm == Algorithm::Reject {
                let epsilon = config.epsilon.unwrap_or(f64::INFINITY);
                let r = abc_reject(
                    &problem,
                    epsilon,
                    config.n,
                    config.max_attempts,
                    seed,
                    &exec,
                )?;
                (vec![r.population], None)
            } else {
                let r = abc_smc(
                    &problem,
                    &schedule()?,
                    config.n,
                    &models[0].kernel,
                    config.max_attempts,
                    seed,
                    &exec,
                )?;
                (r.populations, None)
            }
        }
        Algorithm::RejectJoint | Algorithm::SmcJoint => {
            let joint = if config.models.iter().all(|m| m.prior_prob.is_some()) {
                let probs = config.models.iter().filter_map(|m| m.prior_prob).collect();
                JointPrior::new(probs, priors)
            } else {
                JointPrior::uniform(priors)
            }
            .map_err(|e| ConfigError::new("models", e.to_string()))?;
            let set = ModelSet::new(models, joint)
                .map_err(|e| ConfigError::new("models", e.to_string()))?;
            let problem = JointProblem {
                models: &set,
                observed: &observed,
                distance: &distance,
            };
            if config.algorithm == Algorithm::RejectJoint {
                let epsilon = config.epsilon.unwrap_or(f64::INFINITY);
                let (pop, marginals) = abc_reject_joint(
                    &problem,
                    epsilon,
                    config.n,
                    config.max_attempts,
                    seed,
                    &exec,
                )?;
                (vec![pop], Some(marginals))
            } else {
                let kernel = ModelKernel::new(config.stay_prob)
                    .map_err(|e| ConfigError::new("stay_prob", e.to_string()))?;
                let r = abc_smc_joint(
                    &problem,
                    &schedule()?,
                    config.n,
                    &kernel,
                    config.max_attempts,
                    seed,
                    &exec,
                )?;
                (r.populations, Some(r.marginals))
            }
        }
    };

    let simulations: Vec<u64> = populations.iter().map(|p| p.simulations_used).collect();
    let metadata = RunMetadata {
        algorithm: config.algorithm.to_string(),
        seed: config.seed,
        n: config.n,
        workers: exec.workers(),
        epsilons: populations.iter().map(|p| p.epsilon).collect(),
        attempts: populations.iter().map(|p| p.attempts).collect(),
        total_simulations: simulations.iter().sum(),
        simulations,
        wall_time_secs: started.elapsed().as_secs_f64(),
        config_sha256: config_hash(config),
    };
    Ok(ResultBundle {
        joint: config.algorithm.is_joint(),
        model_names,
        param_ranges,
        bins: config.bins,
        populations,
        marginals,
        metadata,
    })
}
