use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::{check_theta, Simulator};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::stochastics::{sample_categorical, Stream};

/// `propensity(state, theta)`; must be non-negative.
pub type PropensityFn = Box<dyn Fn(&[i64], &[f64]) -> f64 + Send + Sync>;

pub struct Reaction {
    pub stoichiometry: Vec<i64>,
    pub propensity: PropensityFn,
}

/// Continuous-time jump process over integer species counts.
pub struct SsaModel {
    reactions: Vec<Reaction>,
    x0: Vec<i64>,
    param_dim: usize,
    max_events: u64,
}

impl SsaModel {
    pub const DEFAULT_MAX_EVENTS: u64 = 10_000_000;

    pub fn new(reactions: Vec<Reaction>, x0: Vec<i64>, param_dim: usize) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::Model("at least one species is required".into()));
        }
        if x0.iter().any(|&c| c < 0) {
            return Err(Error::Model("initial counts must be non-negative".into()));
        }
        if let Some(r) = reactions.iter().find(|r| r.stoichiometry.len() != x0.len()) {
            return Err(Error::Model(format!(
                "stoichiometry of length {} for {} species",
                r.stoichiometry.len(),
                x0.len()
            )));
        }
        Ok(Self {
            reactions,
            x0,
            param_dim,
            max_events: Self::DEFAULT_MAX_EVENTS,
        })
    }

    pub fn with_max_events(mut self, max_events: u64) -> Self {
        self.max_events = max_events;
        self
    }

    pub fn species(&self) -> usize {
        self.x0.len()
    }
}

impl core::fmt::Debug for SsaModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SsaModel")
            .field("reactions", &self.reactions.len())
            .field("x0", &self.x0)
            .field("param_dim", &self.param_dim)
            .finish_non_exhaustive()
    }
}

fn propensities(model: &SsaModel, state: &[i64], theta: &[f64], out: &mut [f64]) -> Result<f64> {
    let mut total = 0.0;
    for (a, r) in out.iter_mut().zip(&model.reactions) {
        *a = (r.propensity)(state, theta);
        if !(*a >= 0.0) {
            return Err(Error::Simulation(format!("negative or NaN propensity {a}")));
        }
        total += *a;
    }
    if !total.is_finite() {
        return Err(Error::Simulation("propensity overflow".into()));
    }
    Ok(total)
}

/// Gillespie direct method from `t = 0`.
///
/// The value recorded at a requested time is the state left by the latest
/// jump at or before it. No observation noise is added.
pub fn simulate_ssa(
    model: &SsaModel,
    theta: &[f64],
    times: &[f64],
    rng: &mut Stream,
) -> Result<Dataset> {
    check_theta(model.param_dim, theta)?;
    if let Some(&t0) = times.first() {
        if !(t0 >= 0.0) {
            return Err(Error::Argument(format!(
                "observation time {t0} precedes t = 0"
            )));
        }
    }
    let mut state = model.x0.clone();
    let mut props = alloc::vec![0.0; model.reactions.len()];
    let mut values = Vec::with_capacity(times.len() * state.len());
    let mut t = 0.0;
    let mut next_jump: Option<f64> = None;
    let mut events = 0u64;

    for &target in times {
        loop {
            let jump = match next_jump {
                Some(j) => j,
                None => {
                    let total = propensities(model, &state, theta, &mut props)?;
                    let j = if total > 0.0 {
                        // 1 - U lies in (0, 1], so the log is finite.
                        let u = 1.0 - rng.random::<f64>();
                        t - libm::log(u) / total
                    } else {
                        f64::INFINITY
                    };
                    next_jump = Some(j);
                    j
                }
            };
            if jump > target {
                break;
            }
            let r = sample_categorical(&props, rng)?;
            for (c, d) in state.iter_mut().zip(&model.reactions[r].stoichiometry) {
                *c += d;
                if *c < 0 {
                    return Err(Error::Simulation(format!(
                        "reaction {r} drove a count negative at t = {jump}"
                    )));
                }
            }
            t = jump;
            next_jump = None;
            events += 1;
            if events > model.max_events {
                return Err(Error::Simulation(format!(
                    "more than {} events before t = {target}",
                    model.max_events
                )));
            }
        }
        values.extend(state.iter().map(|&c| c as f64));
    }
    Dataset::new(times.to_vec(), values, state.len())
}

impl Simulator for SsaModel {
    fn param_dim(&self) -> usize {
        self.param_dim
    }

    fn simulate(&self, theta: &[f64], times: &[f64], rng: &mut Stream) -> Result<Dataset> {
        simulate_ssa(self, theta, times, rng)
    }
}
