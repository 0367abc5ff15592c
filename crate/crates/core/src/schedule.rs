use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A non-empty, strictly decreasing sequence of non-negative tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceSchedule {
    epsilons: Vec<f64>,
}

impl ToleranceSchedule {
    pub fn new(epsilons: Vec<f64>) -> Result<Self> {
        validate_schedule(&epsilons)?;
        Ok(Self { epsilons })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> f64 {
        self.epsilons[self.epsilons.len() - 1]
    }
}

/// Validates ordering and sign; `+inf` is allowed as a leading entry, NaN is not.
pub fn validate_schedule(epsilons: &[f64]) -> Result<()> {
    let Some(&last) = epsilons.last() else {
        return Err(Error::EmptySchedule);
    };
    for (i, w) in epsilons.windows(2).enumerate() {
        // Negated comparison so NaN fails too.
        if !(w[0] > w[1]) {
            return Err(Error::ScheduleOrder {
                index: i + 1,
                prev: w[0],
                next: w[1],
            });
        }
    }
    if !(last >= 0.0) {
        return Err(Error::NegativeTolerance(last));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let s = ToleranceSchedule::new(vec![3.0, 2.0, 1.0, 0.5]).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.last(), 0.5);
        assert!(matches!(
            ToleranceSchedule::new(vec![1.0, 1.0]),
            Err(Error::ScheduleOrder { index: 1, .. })
        ));
        assert_eq!(
            ToleranceSchedule::new(vec![2.0, -0.1]),
            Err(Error::NegativeTolerance(-0.1))
        );
        assert_eq!(ToleranceSchedule::new(vec![]), Err(Error::EmptySchedule));
        assert!(ToleranceSchedule::new(vec![f64::INFINITY, 0.0]).is_ok());
        assert!(ToleranceSchedule::new(vec![1.0, f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn accepts_iff_strictly_decreasing_and_nonnegative(
            eps in proptest::collection::vec(-2.0f64..10.0, 1..6)
        ) {
            let decreasing = eps.windows(2).all(|w| w[0] > w[1]);
            let min = eps.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(validate_schedule(&eps).is_ok(), decreasing && min >= 0.0);
        }
    }
}
