use super::{check_epsilon, check_n, Problem};
use crate::data::{Particle, Population};
use crate::error::Result;
use crate::exec::{collect, Executor, Outcome};
use crate::stochastics::Seed;

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionResult {
    pub population: Population,
    pub attempts: u64,
    pub acceptance_rate: f64,
}

/// One rejection proposal: draw from the prior, simulate, compare.
pub(crate) fn propose_from_prior(
    problem: &Problem<'_>,
    epsilon: f64,
    seed: Seed,
    generation: u32,
    counter: u64,
) -> Result<Outcome> {
    let mut rng = seed.stream(generation, counter);
    let theta = problem.prior.sample(&mut rng);
    let simulated = problem
        .simulator
        .simulate(&theta, problem.observed.times(), &mut rng)?;
    let d = problem.distance.distance(problem.observed, &simulated)?;
    Ok(if d <= epsilon {
        Outcome::Accepted(Particle {
            model: None,
            theta,
            weight: 1.0,
            distance: d,
            proposal: counter,
        })
    } else {
        Outcome::Rejected
    })
}

pub(crate) fn rejection_population<E: Executor>(
    problem: &Problem<'_>,
    epsilon: f64,
    n: usize,
    max_attempts: u64,
    seed: Seed,
    generation: u32,
    exec: &E,
) -> Result<Population> {
    let collected = collect(exec, generation, n, max_attempts, |counter| {
        propose_from_prior(problem, epsilon, seed, generation, counter)
    })?;
    let mut particles = collected.particles;
    let w = 1.0 / n as f64;
    particles.iter_mut().for_each(|p| p.weight = w);
    Ok(Population {
        index: generation,
        epsilon,
        particles,
        simulations_used: collected.attempts,
        attempts: collected.attempts,
    })
}

/// Samples from the prior until `n` particles land within `epsilon` of the
/// observed data.
pub fn abc_reject<E: Executor>(
    problem: &Problem<'_>,
    epsilon: f64,
    n: usize,
    max_attempts: u64,
    seed: Seed,
    exec: &E,
) -> Result<RejectionResult> {
    problem.validate()?;
    check_epsilon(epsilon)?;
    check_n(n, 1)?;
    let population = rejection_population(problem, epsilon, n, max_attempts, seed, 1, exec)?;
    let attempts = population.attempts;
    Ok(RejectionResult {
        acceptance_rate: n as f64 / attempts as f64,
        attempts,
        population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::distance::DistanceKind;
    use crate::error::Error;
    use crate::exec::Serial;
    use crate::simulators::toys;
    use crate::stochastics::{Marginal, PriorSpec};
    use alloc::vec;

    #[test]
    fn infinite_tolerance_accepts_everything() {
        let sim = toys::decay(10.0, 0.1, 0.01).unwrap();
        let prior = PriorSpec::new(vec![Marginal::Uniform { lo: 0.0, hi: 3.0 }]).unwrap();
        let observed = Dataset::new(vec![1.0], vec![3.0], 1).unwrap();
        let problem = Problem {
            simulator: &sim,
            prior: &prior,
            observed: &observed,
            distance: &DistanceKind::Euclidean,
        };
        let r = abc_reject(&problem, f64::INFINITY, 50, 1000, Seed(1), &Serial).unwrap();
        assert_eq!(r.attempts, 50);
        assert_eq!(r.acceptance_rate, 1.0);
        assert!(r.population.is_normalized());
        // Same draws as sampling the prior from each proposal's stream.
        for p in &r.population.particles {
            let mut rng = Seed(1).stream(1, p.proposal);
            assert_eq!(prior.sample(&mut rng), p.theta);
        }
    }

    #[test]
    fn impossible_tolerance_exhausts_budget() {
        let sim = toys::bernoulli(5, toys::decile_grid()).unwrap();
        let prior = PriorSpec::new(vec![Marginal::Discrete(toys::decile_grid())]).unwrap();
        let observed = Dataset::new(vec![0.0], vec![2.5], 1).unwrap();
        let problem = Problem {
            simulator: &sim,
            prior: &prior,
            observed: &observed,
            distance: &DistanceKind::Euclidean,
        };
        let err = abc_reject(&problem, 0.1, 10, 500, Seed(1), &Serial).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExhausted {
                generation: 1,
                accepted: 0,
                target: 10,
                attempts: 500
            }
        );
        assert!(abc_reject(&problem, -1.0, 10, 500, Seed(1), &Serial).is_err());
        assert!(abc_reject(&problem, 1.0, 0, 500, Seed(1), &Serial).is_err());
    }
}
