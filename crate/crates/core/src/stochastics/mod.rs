//! Random streams, priors, resampling and perturbation kernels.

mod categorical;
mod kernel;
mod prior;
mod stream;

pub use categorical::sample_categorical;
pub use kernel::{
    kernel_density, model_kernel_density, perturb_model, perturb_param, ModelKernel, ParamKernel,
};
pub use prior::{prior_density, sample_prior, JointPrior, Marginal, PriorSpec};
pub use stream::{Seed, Stream, MAX_GENERATION, MAX_PROPOSALS};
