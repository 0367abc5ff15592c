//! Built-in toy models with analytic or enumerable behaviour.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::{DiscreteToyModel, OdeModel, Reaction, SsaModel};
use crate::error::Result;

/// Registry names of the built-in models.
pub const NAMES: [&str; 3] = ["decay", "birth-death", "bernoulli"];

/// `dx/dt = -k x` with one parameter `k`, observed with Gaussian noise.
pub fn decay(x0: f64, noise_sd: f64, step: f64) -> Result<OdeModel> {
    OdeModel::new(
        Box::new(|_, x, theta, dx| dx[0] = -theta[0] * x[0]),
        vec![x0],
        1,
        noise_sd,
    )?
    .with_step(step)
}

/// Linear birth-death process with parameters `(birth, death)` per capita.
pub fn birth_death(x0: i64) -> Result<SsaModel> {
    SsaModel::new(
        vec![
            Reaction {
                stoichiometry: vec![1],
                propensity: Box::new(|x, theta| theta[0] * x[0] as f64),
            },
            Reaction {
                stoichiometry: vec![-1],
                propensity: Box::new(|x, theta| theta[1] * x[0] as f64),
            },
        ],
        vec![x0],
        2,
    )
}

/// Success count of `trials` coin flips with bias on `grid`.
pub fn bernoulli(trials: u32, grid: Vec<f64>) -> Result<DiscreteToyModel> {
    DiscreteToyModel::bernoulli_count(trials, grid)
}

/// The nine-point grid `0.1, 0.2, ..., 0.9`.
pub fn decile_grid() -> Vec<f64> {
    (1..=9).map(|i| f64::from(i) / 10.0).collect()
}
