use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::categorical::sample_categorical;
use super::stream::Stream;
use crate::data::WEIGHT_SUM_TOL;
use crate::error::{Error, Result};

/// One independent prior dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    /// Continuous uniform on `[lo, hi]`. `lo == hi` is accepted as a point
    /// mass, which is what an interval narrower than one ulp collapses to.
    Uniform { lo: f64, hi: f64 },
    /// Equal mass on each of a finite set of distinct values.
    Discrete(Vec<f64>),
}

impl Marginal {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Marginal::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(Error::Prior(format!(
                        "dimension {dim}: uniform bounds [{lo}, {hi}] are not an interval"
                    )));
                }
            }
            Marginal::Discrete(grid) => {
                if grid.is_empty() {
                    return Err(Error::Prior(format!("dimension {dim}: empty grid")));
                }
                if grid.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Prior(format!(
                        "dimension {dim}: non-finite grid value"
                    )));
                }
                for (i, a) in grid.iter().enumerate() {
                    if grid[..i].contains(a) {
                        return Err(Error::Prior(format!(
                            "dimension {dim}: duplicate grid value {a}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Smallest interval holding the support.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Marginal::Uniform { lo, hi } => (*lo, *hi),
            Marginal::Discrete(grid) => grid
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }

    fn sample(&self, rng: &mut Stream) -> f64 {
        match self {
            Marginal::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                (lo + (hi - lo) * u).min(*hi)
            }
            Marginal::Discrete(grid) => grid[rng.random_range(0..grid.len())],
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self {
            Marginal::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    0.0
                } else if lo == hi {
                    1.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            Marginal::Discrete(grid) => {
                if grid.contains(&x) {
                    1.0 / grid.len() as f64
                } else {
                    0.0
                }
            }
        }
    }
}

/// Product prior over independent dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    dims: Vec<Marginal>,
}

impl PriorSpec {
    pub fn new(dims: Vec<Marginal>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Prior("at least one dimension is required".into()));
        }
        for (i, m) in dims.iter().enumerate() {
            m.validate(i)?;
        }
        Ok(Self { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.dims
    }

    /// True when every dimension is a continuous uniform.
    pub fn is_continuous(&self) -> bool {
        self.dims
            .iter()
            .all(|m| matches!(m, Marginal::Uniform { .. }))
    }

    pub fn sample(&self, rng: &mut Stream) -> Vec<f64> {
        self.dims.iter().map(|m| m.sample(rng)).collect()
    }

    pub fn density(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dims.len() {
            return Err(Error::Shape {
                left: format!("prior of dimension {}", self.dims.len()),
                right: format!("theta of length {}", theta.len()),
            });
        }
        let mut p = 1.0;
        for (m, &x) in self.dims.iter().zip(theta) {
            p *= m.density(x);
            if p == 0.0 {
                break;
            }
        }
        Ok(p)
    }
}

pub fn sample_prior(prior: &PriorSpec, rng: &mut Stream) -> Vec<f64> {
    prior.sample(rng)
}

pub fn prior_density(prior: &PriorSpec, theta: &[f64]) -> Result<f64> {
    prior.density(theta)
}

/// Prior on the joint (model, parameter) space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPrior {
    model_prior: Vec<f64>,
    param_priors: Vec<PriorSpec>,
}

impl JointPrior {
    pub fn new(model_prior: Vec<f64>, param_priors: Vec<PriorSpec>) -> Result<Self> {
        if param_priors.is_empty() {
            return Err(Error::Prior("at least one model is required".into()));
        }
        if model_prior.len() != param_priors.len() {
            return Err(Error::Prior(format!(
                "{} model probabilities for {} models",
                model_prior.len(),
                param_priors.len()
            )));
        }
        if model_prior.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::Prior(
                "model probabilities must be non-negative".into(),
            ));
        }
        let total: f64 = model_prior.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Prior(format!(
                "model probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            model_prior,
            param_priors,
        })
    }

    /// Equal prior mass on every model.
    pub fn uniform(param_priors: Vec<PriorSpec>) -> Result<Self> {
        let m = param_priors.len().max(1);
        Self::new(
            alloc::vec![1.0 / m as f64; param_priors.len()],
            param_priors,
        )
    }

    pub fn model_prior(&self) -> &[f64] {
        &self.model_prior
    }

    pub fn param_priors(&self) -> &[PriorSpec] {
        &self.param_priors
    }

    pub fn num_models(&self) -> usize {
        self.param_priors.len()
    }

    pub fn sample(&self, rng: &mut Stream) -> Result<(usize, Vec<f64>)> {
        let m = sample_categorical(&self.model_prior, rng)?;
        Ok((m, self.param_priors[m].sample(rng)))
    }

    pub fn density(&self, model: usize, theta: &[f64]) -> Result<f64> {
        let prior = self
            .param_priors
            .get(model)
            .ok_or_else(|| Error::Argument(format!("model index {model} out of range")))?;
        Ok(self.model_prior[model] * prior.density(theta)?)
    }
}
