//! Approximate Bayesian computation without likelihoods.
//!
//! Four samplers live here, all driven by simulation and a distance
//! threshold instead of likelihood evaluation:
//!
//! * [`inference::abc_reject`]: rejection sampling from the prior.
//! * [`inference::abc_smc`]: sequential Monte Carlo over a decreasing
//!   tolerance schedule with importance-weighted populations.
//! * [`modelsel::abc_reject_joint`] and [`modelsel::abc_smc_joint`]: the
//!   same two samplers on the joint (model, parameter) space, reporting
//!   marginal model probabilities.
//!
//! The crate is `no_std` with `alloc`. All randomness derives from
//! `(seed, generation, proposal counter)` so a run is reproducible no
//! matter how proposals are scheduled across workers; see
//! [`exec::Executor`] for the hook a threaded runner plugs into.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod data;
pub mod distance;
pub mod error;
pub mod exec;
pub mod inference;
pub mod modelsel;
pub mod schedule;
pub mod simulators;
pub mod stochastics;

pub use data::{Dataset, Particle, Population};
pub use distance::{Distance, DistanceKind};
pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use schedule::ToleranceSchedule;
pub use stochastics::{JointPrior, Marginal, ModelKernel, ParamKernel, PriorSpec, Seed, Stream};
