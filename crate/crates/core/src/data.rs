//! Observed/simulated datasets and weighted particle populations.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Absolute tolerance on the weight sum of a normalized population.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Observations at strictly increasing times, one row per time point and
/// one column per observed species.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    times: Vec<f64>,
    values: Vec<f64>,
    width: usize,
}

impl Dataset {
    /// Builds a dataset from a row-major value buffer of `times.len() * width` entries.
    pub fn new(times: Vec<f64>, values: Vec<f64>, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::Dataset("at least one observed column is required"));
        }
        if values.len() != times.len() * width {
            return Err(Error::Dataset("value count does not match times x width"));
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Dataset("all entries must be finite"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Dataset("times must be strictly increasing"));
        }
        Ok(Self {
            times,
            values,
            width,
        })
    }

    pub fn from_rows(times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.len() != times.len() {
            return Err(Error::Dataset("row count does not match times"));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Dataset("ragged rows"));
        }
        Self::new(times, rows.concat(), width)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.width)
    }

    pub(crate) fn shape_label(&self) -> alloc::string::String {
        format!("{}x{}", self.len(), self.width)
    }
}

/// One sampled point, optionally tagged with a model index.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub model: Option<usize>,
    pub theta: Vec<f64>,
    pub weight: f64,
    /// Distance of the simulated dataset that got this particle accepted.
    pub distance: f64,
    /// Proposal counter whose random stream produced this particle.
    pub proposal: u64,
}

/// The accepted, weighted particles of one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub index: u32,
    pub epsilon: f64,
    pub particles: Vec<Particle>,
    /// Simulator calls spent up to and including the last accepted proposal.
    pub simulations_used: u64,
    /// Proposals drawn up to and including the last accepted proposal.
    pub attempts: u64,
}

impl Population {
    /// Rescales weights to sum to one.
    pub fn normalize(&mut self) -> Result<()> {
        let total: f64 = self.particles.iter().map(|p| p.weight).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateWeights);
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Checks non-negative finite weights summing to one within [`WEIGHT_SUM_TOL`].
    pub fn is_normalized(&self) -> bool {
        if self.particles.is_empty() {
            return false;
        }
        let mut total = 0.0;
        for p in &self.particles {
            if !(p.weight >= 0.0) || !p.weight.is_finite() {
                return false;
            }
            total += p.weight;
        }
        (total - 1.0).abs() <= WEIGHT_SUM_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::new(vec![0.0, 1.0], vec![1.0, 2.0], 1).is_ok());
        assert!(Dataset::new(vec![1.0, 1.0], vec![1.0, 2.0], 1).is_err());
        assert!(Dataset::new(vec![0.0, 1.0], vec![1.0], 1).is_err());
        assert!(Dataset::new(vec![0.0], vec![f64::NAN], 1).is_err());
        assert!(Dataset::new(vec![0.0], vec![], 0).is_err());
        let d = Dataset::from_rows(vec![0.0, 1.0], &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert!(Dataset::from_rows(vec![0.0, 1.0], &[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn normalize_population() {
        let particle = |w| Particle {
            model: None,
            theta: vec![0.0],
            weight: w,
            distance: 0.0,
            proposal: 0,
        };
        let mut pop = Population {
            index: 1,
            epsilon: 1.0,
            particles: vec![particle(1.0), particle(3.0)],
            simulations_used: 2,
            attempts: 2,
        };
        assert!(!pop.is_normalized());
        pop.normalize().unwrap();
        assert!(pop.is_normalized());
        assert_eq!(pop.weights(), vec![0.25, 0.75]);

        pop.particles.iter_mut().for_each(|p| p.weight = 0.0);
        assert_eq!(pop.normalize(), Err(Error::DegenerateWeights));
    }
}
