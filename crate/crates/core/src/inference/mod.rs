//! Parameter estimation: ABC rejection and ABC SMC.

mod rejection;
mod smc;

pub use rejection::{abc_reject, RejectionResult};
pub use smc::{abc_smc, compute_weight, propose_from_population, replay_proposal, SmcResult};

use alloc::format;

use crate::data::Dataset;
use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::simulators::Simulator;
use crate::stochastics::PriorSpec;

/// Default per-generation proposal budget.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000_000;

/// Redraws allowed while looking for a proposal inside the prior support.
pub const MAX_PROPOSAL_RETRIES: u32 = 10_000;

/// What a single-model sampler needs besides its tuning knobs.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub simulator: &'a dyn Simulator,
    pub prior: &'a PriorSpec,
    pub observed: &'a Dataset,
    pub distance: &'a dyn Distance,
}

impl Problem<'_> {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.simulator.param_dim() != self.prior.dim() {
            return Err(Error::Shape {
                left: format!("simulator with {} parameters", self.simulator.param_dim()),
                right: format!("prior of dimension {}", self.prior.dim()),
            });
        }
        Ok(())
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) {
        return Err(Error::Argument(format!("tolerance {epsilon} must be >= 0")));
    }
    Ok(())
}

pub(crate) fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::Argument(format!(
            "population size {n} is below the minimum of {min}"
        )));
    }
    Ok(())
}
