use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::prior::PriorSpec;
use super::stream::Stream;
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Component-wise Gaussian random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamKernel {
    sigmas: Vec<f64>,
    reflect: bool,
}

impl ParamKernel {
    /// `reflect` folds perturbed values back into the prior's support.
    pub fn new(sigmas: Vec<f64>, reflect: bool) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::Kernel("at least one scale is required".into()));
        }
        if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::Kernel(format!(
                "scale {s} must be positive and finite"
            )));
        }
        Ok(Self { sigmas, reflect })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn reflects(&self) -> bool {
        self.reflect
    }

    pub fn dim(&self) -> usize {
        self.sigmas.len()
    }
}

/// Folds `x` into `[lo, hi]` by mirroring at both ends.
fn reflect_into(x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if !(width > 0.0) {
        return lo;
    }
    let period = 2.0 * width;
    let mut r = (x - lo) % period;
    if r < 0.0 {
        r += period;
    }
    if r > width {
        r = period - r;
    }
    (lo + r).clamp(lo, hi)
}

fn dim_mismatch(expected: usize, got: usize) -> Error {
    Error::Shape {
        left: format!("kernel of dimension {expected}"),
        right: format!("vector of length {got}"),
    }
}

/// Gaussian step of scale `sigma_i` in every dimension, reflected into the
/// prior's support when the kernel asks for it.
pub fn perturb_param(
    kernel: &ParamKernel,
    prior: &PriorSpec,
    theta: &[f64],
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    if theta.len() != kernel.dim() {
        return Err(dim_mismatch(kernel.dim(), theta.len()));
    }
    if prior.dim() != kernel.dim() {
        return Err(dim_mismatch(kernel.dim(), prior.dim()));
    }
    Ok(theta
        .iter()
        .zip(&kernel.sigmas)
        .zip(prior.marginals())
        .map(|((&x, &sigma), marginal)| {
            let z: f64 = StandardNormal.sample(rng);
            let y = x + sigma * z;
            if kernel.reflect {
                let (lo, hi) = marginal.bounds();
                reflect_into(y, lo, hi)
            } else {
                y
            }
        })
        .collect())
}

/// Density of the un-reflected Gaussian step from `from` to `to`.
///
/// Weights use this form even when the kernel reflects; near the prior
/// boundary it slightly understates the true proposal density.
pub fn kernel_density(kernel: &ParamKernel, to: &[f64], from: &[f64]) -> Result<f64> {
    if to.len() != kernel.dim() {
        return Err(dim_mismatch(kernel.dim(), to.len()));
    }
    if from.len() != kernel.dim() {
        return Err(dim_mismatch(kernel.dim(), from.len()));
    }
    let mut density = 1.0;
    for ((&a, &b), &sigma) in to.iter().zip(from).zip(&kernel.sigmas) {
        let z = (a - b) / sigma;
        density *= INV_SQRT_2PI / sigma * libm::exp(-0.5 * z * z);
    }
    Ok(density)
}

/// Keeps the model with probability `stay_prob`, otherwise moves uniformly
/// to another alive model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelKernel {
    stay_prob: f64,
}

impl ModelKernel {
    pub fn new(stay_prob: f64) -> Result<Self> {
        if !(stay_prob > 0.0 && stay_prob <= 1.0) {
            return Err(Error::Kernel(format!(
                "stay probability {stay_prob} must lie in (0, 1]"
            )));
        }
        Ok(Self { stay_prob })
    }

    pub fn stay_prob(&self) -> f64 {
        self.stay_prob
    }
}

pub fn perturb_model(
    kernel: &ModelKernel,
    model: usize,
    alive: &[usize],
    rng: &mut Stream,
) -> Result<usize> {
    if alive.is_empty() {
        return Err(Error::NoAliveModels);
    }
    let Some(pos) = alive.iter().position(|&m| m == model) else {
        return Err(Error::DeadModel(model));
    };
    if alive.len() == 1 {
        return Ok(model);
    }
    if rng.random::<f64>() < kernel.stay_prob {
        return Ok(model);
    }
    let mut k = rng.random_range(0..alive.len() - 1);
    if k >= pos {
        k += 1;
    }
    Ok(alive[k])
}

pub fn model_kernel_density(
    kernel: &ModelKernel,
    to: usize,
    from: usize,
    alive: &[usize],
) -> Result<f64> {
    for m in [to, from] {
        if !alive.contains(&m) {
            return Err(Error::DeadModel(m));
        }
    }
    Ok(if alive.len() == 1 {
        1.0
    } else if to == from {
        kernel.stay_prob
    } else {
        (1.0 - kernel.stay_prob) / (alive.len() - 1) as f64
    })
}
