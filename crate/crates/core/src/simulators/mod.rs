//! Simulation frameworks `f(D | theta)`.
//!
//! Deterministic models are integrated and then observed with additive
//! Gaussian noise. Stochastic jump processes are simulated exactly and
//! observed without added noise. A discrete toy channel samples a data
//! statistic from an explicit conditional distribution, which makes exact
//! posteriors enumerable.

mod discrete;
mod ode;
mod ssa;
pub mod toys;

pub use discrete::{simulate_discrete, DiscreteToyModel};
pub use ode::{integrate_ode, simulate_deterministic, OdeModel, RhsFn, DEFAULT_STEP};
pub use ssa::{simulate_ssa, PropensityFn, Reaction, SsaModel};

use crate::data::Dataset;
use crate::error::Result;
use crate::stochastics::Stream;

/// Extension point for user models.
pub trait Simulator: Send + Sync {
    fn param_dim(&self) -> usize;

    /// Simulates one dataset observed at `times`.
    fn simulate(&self, theta: &[f64], times: &[f64], rng: &mut Stream) -> Result<Dataset>;
}

impl<S: Simulator + ?Sized> Simulator for alloc::boxed::Box<S> {
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }

    fn simulate(&self, theta: &[f64], times: &[f64], rng: &mut Stream) -> Result<Dataset> {
        (**self).simulate(theta, times, rng)
    }
}

impl<S: Simulator + ?Sized> Simulator for alloc::sync::Arc<S> {
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }

    fn simulate(&self, theta: &[f64], times: &[f64], rng: &mut Stream) -> Result<Dataset> {
        (**self).simulate(theta, times, rng)
    }
}

pub(crate) fn check_theta(expected: usize, theta: &[f64]) -> Result<()> {
    if theta.len() != expected {
        return Err(crate::error::Error::Shape {
            left: alloc::format!("model with {expected} parameters"),
            right: alloc::format!("theta of length {}", theta.len()),
        });
    }
    Ok(())
}
