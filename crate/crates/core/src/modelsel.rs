//! Model selection on the joint (model, parameter) space.
//!
//! Particles carry a model index. Rejection draws `(m, theta)` from the
//! joint prior; SMC resamples a model from the previous marginal, moves it
//! with a [`ModelKernel`] restricted to models still alive, resamples a
//! parameter among that model's particles and perturbs it with the model's
//! own [`ParamKernel`].
//!
//! Accepted SMC particles get the importance weight
//!
//! ```text
//! w(m, theta) = pi(m, theta) / ( [sum_m' P(m') KM(m | m')] * [sum_{j in m} w~_j KP_m(theta | theta_j)] )
//! ```
//!
//! where `P` is the previous generation's model marginal and `w~` are its
//! weights renormalized within model `m`. With a single model this is
//! exactly the parameter-estimation weight.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, Particle, Population};
use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::exec::{check_budget, collect, Executor, Outcome};
use crate::inference::{check_epsilon, check_n, MAX_PROPOSAL_RETRIES};
use crate::schedule::ToleranceSchedule;
use crate::simulators::Simulator;
use crate::stochastics::{
    kernel_density, model_kernel_density, perturb_model, perturb_param, sample_categorical,
    JointPrior, ModelKernel, ParamKernel, Seed, Stream,
};

pub struct ModelSpec {
    pub name: String,
    pub simulator: Box<dyn Simulator>,
    pub kernel: ParamKernel,
}

impl core::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("kernel", &self.kernel)
            .finish_non_exhaustive()
    }
}

/// Candidate models with their joint prior.
#[derive(Debug)]
pub struct ModelSet {
    models: Vec<ModelSpec>,
    joint: JointPrior,
}

impl ModelSet {
    pub fn new(models: Vec<ModelSpec>, joint: JointPrior) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::Model("at least one model is required".into()));
        }
        if models.len() != joint.num_models() {
            return Err(Error::Model(format!(
                "{} models but a joint prior over {}",
                models.len(),
                joint.num_models()
            )));
        }
        for (spec, prior) in models.iter().zip(joint.param_priors()) {
            if spec.simulator.param_dim() != prior.dim() || spec.kernel.dim() != prior.dim() {
                return Err(Error::Model(format!(
                    "model {}: simulator, prior and kernel dimensions differ",
                    spec.name
                )));
            }
        }
        Ok(Self { models, joint })
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn joint(&self) -> &JointPrior {
        &self.joint
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Model marginals `P_t(m)` for each generation, in generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMarginals {
    pub per_generation: Vec<Vec<f64>>,
}

impl ModelMarginals {
    pub fn last(&self) -> &[f64] {
        self.per_generation.last().map_or(&[], Vec::as_slice)
    }
}

#[derive(Clone, Copy)]
pub struct JointProblem<'a> {
    pub models: &'a ModelSet,
    pub observed: &'a Dataset,
    pub distance: &'a dyn Distance,
}

/// `P(m') = sum of weights of particles with model m'`.
pub fn marginal_model_prob(pop: &Population, num_models: usize) -> Result<Vec<f64>> {
    let mut marginals = vec![0.0; num_models];
    for (i, p) in pop.particles.iter().enumerate() {
        let m = p.model.ok_or(Error::MissingModel(i))?;
        *marginals.get_mut(m).ok_or_else(|| {
            Error::Argument(format!("particle {i} has model {m} of {num_models}"))
        })? += p.weight;
    }
    Ok(marginals)
}

/// Acceptance-count ratios `count_m / n`, exact up to one division.
pub fn marginals_from_counts(counts: &[usize]) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

fn model_counts(pop: &Population, num_models: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; num_models];
    for (i, p) in pop.particles.iter().enumerate() {
        let m = p.model.ok_or(Error::MissingModel(i))?;
        *counts.get_mut(m).ok_or_else(|| {
            Error::Argument(format!("particle {i} has model {m} of {num_models}"))
        })? += 1;
    }
    Ok(counts)
}

fn accept_or_reject(
    problem: &JointProblem<'_>,
    model: usize,
    theta: Vec<f64>,
    epsilon: f64,
    counter: u64,
    rng: &mut Stream,
) -> Result<Option<Particle>> {
    let simulated =
        problem.models.models[model]
            .simulator
            .simulate(&theta, problem.observed.times(), rng)?;
    let d = problem.distance.distance(problem.observed, &simulated)?;
    Ok((d <= epsilon).then_some(Particle {
        model: Some(model),
        theta,
        weight: 1.0,
        distance: d,
        proposal: counter,
    }))
}

fn joint_rejection_population<E: Executor>(
    problem: &JointProblem<'_>,
    epsilon: f64,
    n: usize,
    max_attempts: u64,
    seed: Seed,
    exec: &E,
) -> Result<Population> {
    let collected = collect(exec, 1, n, max_attempts, |counter| {
        let mut rng = seed.stream(1, counter);
        let (m, theta) = problem.models.joint.sample(&mut rng)?;
        Ok(
            match accept_or_reject(problem, m, theta, epsilon, counter, &mut rng)? {
                Some(p) => Outcome::Accepted(p),
                None => Outcome::Rejected,
            },
        )
    })?;
    let mut particles = collected.particles;
    let w = 1.0 / n as f64;
    particles.iter_mut().for_each(|p| p.weight = w);
    Ok(Population {
        index: 1,
        epsilon,
        particles,
        simulations_used: collected.attempts,
        attempts: collected.attempts,
    })
}

fn check_joint(problem: &JointProblem<'_>) -> Result<()> {
    if problem.models.is_empty() {
        return Err(Error::NoAliveModels);
    }
    Ok(())
}

/// Joint-space rejection. Marginals are acceptance-count ratios.
pub fn abc_reject_joint<E: Executor>(
    problem: &JointProblem<'_>,
    epsilon: f64,
    n: usize,
    max_attempts: u64,
    seed: Seed,
    exec: &E,
) -> Result<(Population, ModelMarginals)> {
    check_joint(problem)?;
    check_epsilon(epsilon)?;
    check_n(n, 1)?;
    let pop = joint_rejection_population(problem, epsilon, n, max_attempts, seed, exec)?;
    let counts = model_counts(&pop, problem.models.len())?;
    Ok((
        pop,
        ModelMarginals {
            per_generation: vec![marginals_from_counts(&counts)],
        },
    ))
}

/// The previous generation, indexed for joint proposals and weights.
pub struct JointContext<'a> {
    prev: &'a Population,
    marginals: Vec<f64>,
    alive: Vec<usize>,
    /// Particle indices of each model, in population order.
    members: Vec<Vec<usize>>,
    /// Unnormalized within-model weights, aligned with `members`.
    member_weights: Vec<Vec<f64>>,
}

impl<'a> JointContext<'a> {
    pub fn new(prev: &'a Population, num_models: usize) -> Result<Self> {
        let marginals = marginal_model_prob(prev, num_models)?;
        let mut members = vec![Vec::new(); num_models];
        let mut member_weights = vec![Vec::new(); num_models];
        for (i, p) in prev.particles.iter().enumerate() {
            // marginal_model_prob already checked the index.
            let m = p.model.unwrap_or_default();
            members[m].push(i);
            member_weights[m].push(p.weight);
        }
        let alive: Vec<usize> = (0..num_models).filter(|&m| marginals[m] > 0.0).collect();
        if alive.is_empty() {
            return Err(Error::NoAliveModels);
        }
        Ok(Self {
            prev,
            marginals,
            alive,
            members,
            member_weights,
        })
    }

    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    pub fn alive(&self) -> &[usize] {
        &self.alive
    }
}

/// Draws `(m**, theta**)`: model from the previous marginal, moved by the
/// model kernel, then a parameter of that model resampled and perturbed.
/// The whole draw repeats until it lands inside the joint prior support.
pub fn propose_joint(
    ctx: &JointContext<'_>,
    models: &ModelSet,
    model_kernel: &ModelKernel,
    rng: &mut Stream,
) -> Result<(usize, Vec<f64>)> {
    for _ in 0..MAX_PROPOSAL_RETRIES {
        let sampled = sample_categorical(&ctx.marginals, rng)?;
        let m = perturb_model(model_kernel, sampled, &ctx.alive, rng)?;
        let j = sample_categorical(&ctx.member_weights[m], rng)?;
        let source = &ctx.prev.particles[ctx.members[m][j]];
        let prior = &models.joint.param_priors()[m];
        let theta = perturb_param(&models.models[m].kernel, prior, &source.theta, rng)?;
        if models.joint.density(m, &theta)? > 0.0 {
            return Ok((m, theta));
        }
    }
    Err(Error::RetryBound(MAX_PROPOSAL_RETRIES))
}

/// Unnormalized joint importance weight; see the module docs for the formula.
pub fn compute_joint_weight(
    model: usize,
    theta: &[f64],
    ctx: &JointContext<'_>,
    models: &ModelSet,
    model_kernel: &ModelKernel,
) -> Result<f64> {
    if !ctx.alive.contains(&model) {
        return Err(Error::DeadModel(model));
    }
    let numerator = models.joint.density(model, theta)?;
    if numerator == 0.0 {
        return Ok(0.0);
    }
    let mut model_mixture = 0.0;
    for &from in &ctx.alive {
        model_mixture +=
            ctx.marginals[from] * model_kernel_density(model_kernel, model, from, &ctx.alive)?;
    }
    // Dividing by P(m) turns the raw within-model weight sum into the
    // renormalized one; written this way it is exactly 1 for one model.
    let model_factor = model_mixture / ctx.marginals[model];
    let kernel = &models.models[model].kernel;
    let mut param_mixture = 0.0;
    for &i in &ctx.members[model] {
        let p = &ctx.prev.particles[i];
        if p.weight > 0.0 {
            param_mixture += p.weight * kernel_density(kernel, theta, &p.theta)?;
        }
    }
    let denominator = model_factor * param_mixture;
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(Error::Numeric(
            "joint proposal density is zero or not finite",
        ));
    }
    Ok(numerator / denominator)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSmcResult {
    pub populations: Vec<Population>,
    pub marginals: ModelMarginals,
    pub total_simulations: u64,
}

/// Joint-space ABC SMC, recording model marginals after every generation.
pub fn abc_smc_joint<E: Executor>(
    problem: &JointProblem<'_>,
    schedule: &ToleranceSchedule,
    n: usize,
    model_kernel: &ModelKernel,
    max_attempts_per_gen: u64,
    seed: Seed,
    exec: &E,
) -> Result<JointSmcResult> {
    check_joint(problem)?;
    check_n(n, 2)?;
    check_budget(max_attempts_per_gen)?;
    let models = problem.models;
    if schedule.len() > 1
        && models
            .joint
            .param_priors()
            .iter()
            .any(|p| !p.is_continuous())
    {
        return Err(Error::Argument(
            "Gaussian perturbation needs continuous (uniform) prior dimensions".into(),
        ));
    }

    let eps = schedule.epsilons();
    let mut populations = Vec::with_capacity(eps.len());
    let mut per_generation = Vec::with_capacity(eps.len());
    let first = joint_rejection_population(problem, eps[0], n, max_attempts_per_gen, seed, exec)?;
    per_generation.push(marginal_model_prob(&first, models.len())?);
    populations.push(first);

    for (t, &epsilon) in eps.iter().enumerate().skip(1) {
        let index = t as u32 + 1;
        let ctx = JointContext::new(&populations[t - 1], models.len())?;
        let collected = collect(exec, index, n, max_attempts_per_gen, |counter| {
            let mut rng = seed.stream(index, counter);
            let (m, theta) = propose_joint(&ctx, models, model_kernel, &mut rng)?;
            let Some(mut p) = accept_or_reject(problem, m, theta, epsilon, counter, &mut rng)?
            else {
                return Ok(Outcome::Rejected);
            };
            p.weight = compute_joint_weight(m, &p.theta, &ctx, models, model_kernel)?;
            Ok(Outcome::Accepted(p))
        })?;
        let mut population = Population {
            index,
            epsilon,
            particles: collected.particles,
            simulations_used: collected.attempts,
            attempts: collected.attempts,
        };
        population.normalize()?;
        per_generation.push(marginal_model_prob(&population, models.len())?);
        populations.push(population);
    }

    let total_simulations = populations.iter().map(|p| p.simulations_used).sum();
    Ok(JointSmcResult {
        populations,
        marginals: ModelMarginals { per_generation },
        total_simulations,
    })
}
