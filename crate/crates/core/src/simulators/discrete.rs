use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_theta, Simulator};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stochastics::{sample_categorical, Stream};

const PMF_SUM_TOL: f64 = 1e-9;

/// A one-parameter model on a finite grid whose data is a single scalar
/// drawn from an explicit conditional distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteToyModel {
    grid: Vec<f64>,
    outcomes: Vec<f64>,
    /// `pmf[g][k]` is `P(outcome k | grid[g])`.
    pmf: Vec<Vec<f64>>,
}

impl DiscreteToyModel {
    pub fn new(grid: Vec<f64>, outcomes: Vec<f64>, pmf: Vec<Vec<f64>>) -> Result<Self> {
        if grid.is_empty() || outcomes.is_empty() {
            return Err(Error::Model(
                "grid and outcome set must be non-empty".into(),
            ));
        }
        if grid.iter().chain(&outcomes).any(|v| !v.is_finite()) {
            return Err(Error::Model("grid and outcomes must be finite".into()));
        }
        if grid.iter().enumerate().any(|(i, g)| grid[..i].contains(g)) {
            return Err(Error::Model("grid values must be distinct".into()));
        }
        if pmf.len() != grid.len() {
            return Err(Error::Model(
                "one conditional distribution per grid value".into(),
            ));
        }
        for (g, row) in grid.iter().zip(&pmf) {
            if row.len() != outcomes.len() {
                return Err(Error::Model(format!("conditional at {g} has wrong length")));
            }
            if row.iter().any(|p| !(*p >= 0.0)) {
                return Err(Error::Model(format!(
                    "conditional at {g} has a negative mass"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PMF_SUM_TOL {
                return Err(Error::Model(format!("conditional at {g} sums to {total}")));
            }
        }
        Ok(Self {
            grid,
            outcomes,
            pmf,
        })
    }

    /// Number of successes in `trials` Bernoulli(theta) trials, theta on `grid`.
    pub fn bernoulli_count(trials: u32, grid: Vec<f64>) -> Result<Self> {
        if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Model(
                "success probabilities must lie in [0, 1]".into(),
            ));
        }
        let outcomes = (0..=trials).map(f64::from).collect();
        let pmf = grid
            .iter()
            .map(|&p| {
                (0..=trials)
                    .map(|k| {
                        binomial(trials, k)
                            * libm::pow(p, f64::from(k))
                            * libm::pow(1.0 - p, f64::from(trials - k))
                    })
                    .collect()
            })
            .collect();
        Self::new(grid, outcomes, pmf)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    /// `P(outcome | theta)` for a grid value, or `None` off the grid.
    pub fn conditional(&self, theta: f64) -> Option<&[f64]> {
        self.grid
            .iter()
            .position(|&g| g == theta)
            .map(|i| self.pmf[i].as_slice())
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// One draw of the statistic, reported as a single observation at `t = 0`.
pub fn simulate_discrete(
    model: &DiscreteToyModel,
    theta: &[f64],
    rng: &mut Stream,
) -> Result<Dataset> {
    check_theta(1, theta)?;
    let pmf = model
        .conditional(theta[0])
        .ok_or(Error::OffGrid(theta[0]))?;
    let k = sample_categorical(pmf, rng)?;
    Dataset::new(vec![0.0], vec![model.outcomes[k]], 1)
}

impl Simulator for DiscreteToyModel {
    fn param_dim(&self) -> usize {
        1
    }

    fn simulate(&self, theta: &[f64], _times: &[f64], rng: &mut Stream) -> Result<Dataset> {
        simulate_discrete(self, theta, rng)
    }
}
