//! Proposal evaluation and the acceptance collector.
//!
//! Every proposal is a pure function of its counter (its random stream is
//! derived from `(seed, generation, counter)`), so an [`Executor`] may
//! evaluate a batch of counters in any order or on any number of threads.
//! The collector then walks results in counter order and keeps the first
//! `n` acceptances; later acceptances in the same batch are discarded.
//! Population contents and the reported attempt counts therefore do not
//! depend on the executor or its batch size.

use alloc::vec::Vec;

use crate::data::Particle;
use crate::error::{Error, Result};
use crate::stochastics::MAX_PROPOSALS;

pub trait Executor: Sync {
    /// Evaluates `f` at `start..start + len`, returning results in counter order.
    fn map_range<T, F>(&self, start: u64, len: u64, f: &F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync;

    /// Number of proposals handed out per batch.
    fn batch_size(&self) -> u64;
}

/// Evaluates proposals one at a time on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_range<T, F>(&self, start: u64, len: u64, f: &F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync,
    {
        (start..start + len).map(f).collect()
    }

    fn batch_size(&self) -> u64 {
        1
    }
}

/// Result of evaluating one proposal.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Rejected,
    Accepted(Particle),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Collected {
    pub particles: Vec<Particle>,
    /// Proposals up to and including the n-th acceptance. Each one ran
    /// the simulator exactly once.
    pub attempts: u64,
}

pub(crate) fn check_budget(max_attempts: u64) -> Result<()> {
    if max_attempts == 0 || max_attempts > MAX_PROPOSALS {
        return Err(Error::Argument(alloc::format!(
            "attempt budget {max_attempts} must lie in 1..={MAX_PROPOSALS}"
        )));
    }
    Ok(())
}

pub(crate) fn collect<E, F>(
    exec: &E,
    generation: u32,
    n: usize,
    max_attempts: u64,
    eval: F,
) -> Result<Collected>
where
    E: Executor,
    F: Fn(u64) -> Result<Outcome> + Sync,
{
    check_budget(max_attempts)?;
    let mut particles = Vec::with_capacity(n);
    let mut next = 0u64;
    let batch = exec.batch_size().max(1);
    while particles.len() < n {
        if next >= max_attempts {
            return Err(Error::BudgetExhausted {
                generation,
                accepted: particles.len(),
                target: n,
                attempts: next,
            });
        }
        let len = batch.min(max_attempts - next);
        let results = exec.map_range(next, len, &eval);
        for (counter, outcome) in (next..).zip(results) {
            if let Outcome::Accepted(p) = outcome? {
                particles.push(p);
                if particles.len() == n {
                    return Ok(Collected {
                        particles,
                        attempts: counter + 1,
                    });
                }
            }
        }
        next += len;
    }
    Ok(Collected {
        particles,
        attempts: next,
    })
}
