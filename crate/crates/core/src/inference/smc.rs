use alloc::format;
use alloc::vec::Vec;

use super::rejection::rejection_population;
use super::{check_n, Problem, MAX_PROPOSAL_RETRIES};
use crate::data::{Particle, Population};
use crate::error::{Error, Result};
use crate::exec::{check_budget, collect, Executor, Outcome};
use crate::schedule::ToleranceSchedule;
use crate::stochastics::{
    kernel_density, perturb_param, sample_categorical, ParamKernel, PriorSpec, Seed, Stream,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SmcResult {
    pub populations: Vec<Population>,
    pub total_simulations: u64,
}

impl SmcResult {
    pub fn last(&self) -> &Population {
        self.populations.last().expect("at least one generation")
    }
}

pub(crate) fn propose_with_weights(
    prev: &Population,
    weights: &[f64],
    kernel: &ParamKernel,
    prior: &PriorSpec,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    for _ in 0..MAX_PROPOSAL_RETRIES {
        let source = &prev.particles[sample_categorical(weights, rng)?];
        let theta = perturb_param(kernel, prior, &source.theta, rng)?;
        if prior.density(&theta)? > 0.0 {
            return Ok(theta);
        }
    }
    Err(Error::RetryBound(MAX_PROPOSAL_RETRIES))
}

/// Resamples a particle by weight and perturbs it with `kernel`.
///
/// A proposal outside the prior support is discarded and the whole draw
/// (source particle included) is repeated, which keeps the proposal density
/// proportional to the kernel mixture inside the support.
pub fn propose_from_population(
    prev: &Population,
    kernel: &ParamKernel,
    prior: &PriorSpec,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    propose_with_weights(prev, &prev.weights(), kernel, prior, rng)
}

/// Unnormalized importance weight `prior(theta) / sum_j w_j K(theta | theta_j)`.
pub fn compute_weight(
    theta: &[f64],
    prev: &Population,
    kernel: &ParamKernel,
    prior: &PriorSpec,
) -> Result<f64> {
    let numerator = prior.density(theta)?;
    if numerator == 0.0 {
        return Ok(0.0);
    }
    let denominator = mixture_density(theta, &prev.particles, kernel)?;
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(Error::Numeric(
            "kernel mixture density is zero or not finite",
        ));
    }
    Ok(numerator / denominator)
}

/// `sum_j w_j K(theta | theta_j)` in particle order.
pub(crate) fn mixture_density<'a>(
    theta: &[f64],
    particles: impl IntoIterator<Item = &'a Particle>,
    kernel: &ParamKernel,
) -> Result<f64> {
    let mut total = 0.0;
    for p in particles {
        if p.weight > 0.0 {
            total += p.weight * kernel_density(kernel, theta, &p.theta)?;
        }
    }
    Ok(total)
}

struct Generation<'a> {
    prev: &'a Population,
    weights: Vec<f64>,
}

fn perturbed_proposal(
    problem: &Problem<'_>,
    kernel: &ParamKernel,
    generation: &Generation<'_>,
    epsilon: f64,
    rng: &mut Stream,
    counter: u64,
) -> Result<Outcome> {
    let theta = propose_with_weights(
        generation.prev,
        &generation.weights,
        kernel,
        problem.prior,
        rng,
    )?;
    let simulated = problem
        .simulator
        .simulate(&theta, problem.observed.times(), rng)?;
    let d = problem.distance.distance(problem.observed, &simulated)?;
    if !(d <= epsilon) {
        return Ok(Outcome::Rejected);
    }
    let weight = compute_weight(&theta, generation.prev, kernel, problem.prior)?;
    Ok(Outcome::Accepted(Particle {
        model: None,
        theta,
        weight,
        distance: d,
        proposal: counter,
    }))
}

/// Re-runs proposal `counter` of generation `index` (1-based) and returns the
/// particle it produced, whether or not it was accepted at `epsilon`.
///
/// `prev` is the previous population, or `None` for generation 1.
pub fn replay_proposal(
    problem: &Problem<'_>,
    prev: Option<&Population>,
    kernel: &ParamKernel,
    epsilon: f64,
    seed: Seed,
    index: u32,
    counter: u64,
) -> Result<Outcome> {
    match prev {
        None => super::rejection::propose_from_prior(problem, epsilon, seed, index, counter),
        Some(prev) => {
            let generation = Generation {
                prev,
                weights: prev.weights(),
            };
            let mut rng = seed.stream(index, counter);
            perturbed_proposal(problem, kernel, &generation, epsilon, &mut rng, counter)
        }
    }
}

pub(crate) fn check_kernel(kernel: &ParamKernel, prior: &PriorSpec) -> Result<()> {
    if kernel.dim() != prior.dim() {
        return Err(Error::Shape {
            left: format!("kernel of dimension {}", kernel.dim()),
            right: format!("prior of dimension {}", prior.dim()),
        });
    }
    Ok(())
}

pub(crate) fn check_perturbable(prior: &PriorSpec, schedule: &ToleranceSchedule) -> Result<()> {
    if schedule.len() > 1 && !prior.is_continuous() {
        return Err(Error::Argument(
            "Gaussian perturbation needs continuous (uniform) prior dimensions".into(),
        ));
    }
    Ok(())
}

/// ABC SMC over a strictly decreasing tolerance schedule.
///
/// Generation 1 is rejection sampling at the first tolerance with uniform
/// weights; every later generation resamples and perturbs the previous one
/// and reweights accepted particles with [`compute_weight`].
pub fn abc_smc<E: Executor>(
    problem: &Problem<'_>,
    schedule: &ToleranceSchedule,
    n: usize,
    kernel: &ParamKernel,
    max_attempts_per_gen: u64,
    seed: Seed,
    exec: &E,
) -> Result<SmcResult> {
    problem.validate()?;
    check_n(n, 2)?;
    check_kernel(kernel, problem.prior)?;
    check_perturbable(problem.prior, schedule)?;
    check_budget(max_attempts_per_gen)?;

    let eps = schedule.epsilons();
    let mut populations = Vec::with_capacity(eps.len());
    populations.push(rejection_population(
        problem,
        eps[0],
        n,
        max_attempts_per_gen,
        seed,
        1,
        exec,
    )?);

    for (t, &epsilon) in eps.iter().enumerate().skip(1) {
        let index = t as u32 + 1;
        let prev = &populations[t - 1];
        let generation = Generation {
            prev,
            weights: prev.weights(),
        };
        let collected = collect(exec, index, n, max_attempts_per_gen, |counter| {
            let mut rng = seed.stream(index, counter);
            perturbed_proposal(problem, kernel, &generation, epsilon, &mut rng, counter)
        })?;
        let mut population = Population {
            index,
            epsilon,
            particles: collected.particles,
            simulations_used: collected.attempts,
            attempts: collected.attempts,
        };
        population.normalize()?;
        populations.push(population);
    }

    let total_simulations = populations.iter().map(|p| p.simulations_used).sum();
    Ok(SmcResult {
        populations,
        total_simulations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastics::Marginal;
    use alloc::vec;
    use rand::Rng;

    fn particle(theta: f64, weight: f64) -> Particle {
        Particle {
            model: None,
            theta: vec![theta],
            weight,
            distance: 0.0,
            proposal: 0,
        }
    }

    fn population(particles: Vec<Particle>) -> Population {
        Population {
            index: 1,
            epsilon: 1.0,
            particles,
            simulations_used: 0,
            attempts: 0,
        }
    }

    fn uniform(lo: f64, hi: f64) -> PriorSpec {
        PriorSpec::new(vec![Marginal::Uniform { lo, hi }]).unwrap()
    }

    #[test]
    fn degenerate_kernel_returns_source() {
        let prev = population(vec![particle(0.3, 0.0), particle(1.7, 1.0)]);
        let kernel = ParamKernel::new(vec![1e-300], false).unwrap();
        let mut rng = Seed(1).stream(2, 0);
        for _ in 0..100 {
            assert_eq!(
                propose_from_population(&prev, &kernel, &uniform(0.0, 2.0), &mut rng).unwrap(),
                vec![1.7]
            );
        }
    }

    #[test]
    fn zero_weight_particle_is_never_a_source() {
        // Sources are far apart relative to sigma, so the proposal reveals its source.
        let prev = population(vec![particle(0.0, 0.0), particle(10.0, 1.0)]);
        let kernel = ParamKernel::new(vec![0.1], false).unwrap();
        let prior = uniform(-100.0, 100.0);
        let mut rng = Seed(2).stream(2, 0);
        for _ in 0..10_000 {
            let theta = propose_from_population(&prev, &kernel, &prior, &mut rng).unwrap();
            assert!(theta[0] > 5.0);
        }
    }

    #[test]
    fn reflective_proposals_stay_in_support() {
        let prev = population(vec![particle(0.01, 0.5), particle(0.99, 0.5)]);
        let kernel = ParamKernel::new(vec![0.5], true).unwrap();
        let prior = uniform(0.0, 1.0);
        let mut rng = Seed(3).stream(2, 0);
        for _ in 0..10_000 {
            let theta = propose_from_population(&prev, &kernel, &prior, &mut rng).unwrap();
            assert!(prior.density(&theta).unwrap() > 0.0);
        }
    }

    #[test]
    fn retry_bound() {
        let prev = population(vec![particle(50.0, 1.0)]);
        let kernel = ParamKernel::new(vec![0.01], false).unwrap();
        let mut rng = Seed(3).stream(2, 0);
        assert_eq!(
            propose_from_population(&prev, &kernel, &uniform(0.0, 1.0), &mut rng),
            Err(Error::RetryBound(MAX_PROPOSAL_RETRIES))
        );
    }

    #[test]
    fn single_source_weight() {
        let prev = population(vec![particle(0.5, 1.0)]);
        let kernel = ParamKernel::new(vec![0.3], false).unwrap();
        let prior = uniform(0.0, 2.0);
        let w = compute_weight(&[0.9], &prev, &kernel, &prior).unwrap();
        let expected = 0.5 / kernel_density(&kernel, &[0.9], &[0.5]).unwrap();
        assert_eq!(w, expected);
        assert_eq!(compute_weight(&[2.5], &prev, &kernel, &prior).unwrap(), 0.0);
    }

    #[test]
    fn weight_matches_direct_evaluation() {
        // Independent oracle: pi(theta) / sum_j w_j N(theta; theta_j, sigma^2), coded inline.
        let sources = [(0.2, 0.5), (1.1, 0.3), (1.9, 0.2)];
        let prev = population(sources.iter().map(|&(t, w)| particle(t, w)).collect());
        let kernel = ParamKernel::new(vec![1.0], false).unwrap();
        let prior = uniform(0.0, 2.0);
        let mut rng = Seed(4).stream(0, 0);
        for _ in 0..100 {
            let theta: f64 = rng.random_range(0.0..2.0);
            let mixture: f64 = sources
                .iter()
                .map(|&(mu, w)| {
                    let z = theta - mu;
                    w * libm::exp(-z * z / 2.0) / libm::sqrt(2.0 * core::f64::consts::PI)
                })
                .sum();
            let oracle = 0.5 / mixture;
            let w = compute_weight(&[theta], &prev, &kernel, &prior).unwrap();
            assert!(((w - oracle) / oracle).abs() < 1e-12);
        }
    }
}
