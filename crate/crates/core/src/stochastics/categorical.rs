use rand::Rng;

use super::stream::Stream;
use crate::error::{Error, Result};

/// Draws index `i` with probability `weights[i] / sum(weights)`.
///
/// Weights need not be normalized. A single-entry vector returns 0
/// without consuming randomness.
pub fn sample_categorical(weights: &[f64], rng: &mut Stream) -> Result<usize> {
    let mut total = 0.0;
    for &w in weights {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Argument(alloc::format!(
                "categorical weight {w} is not a non-negative finite number"
            )));
        }
        total += w;
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    if weights.len() == 1 {
        return Ok(0);
    }
    let target = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            cumulative += w;
            last_positive = i;
            if target < cumulative {
                return Ok(i);
            }
        }
    }
    // Rounding can leave `target` a hair above the accumulated total.
    Ok(last_positive)
}
