//! Distances between an observed and a simulated dataset.
//!
//! Datasets are compared entry by entry at shared observation times; no
//! interpolation happens. Any `Fn(&Dataset, &Dataset) -> Result<f64>` is a
//! [`Distance`], so callers can plug in their own comparison.

use alloc::string::ToString;

use crate::data::Dataset;
use crate::error::{Error, Result};

pub trait Distance: Send + Sync {
    fn distance(&self, observed: &Dataset, simulated: &Dataset) -> Result<f64>;
}

impl<F> Distance for F
where
    F: Fn(&Dataset, &Dataset) -> Result<f64> + Send + Sync,
{
    fn distance(&self, observed: &Dataset, simulated: &Dataset) -> Result<f64> {
        self(observed, simulated)
    }
}

/// Built-in distances, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Euclidean,
    SumSq,
}

impl DistanceKind {
    pub const NAMES: [&'static str; 2] = ["euclidean", "sumsq"];

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "euclidean" => Some(Self::Euclidean),
            "sumsq" => Some(Self::SumSq),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Euclidean => "euclidean",
            Self::SumSq => "sumsq",
        }
    }
}

impl Distance for DistanceKind {
    fn distance(&self, observed: &Dataset, simulated: &Dataset) -> Result<f64> {
        match self {
            Self::Euclidean => distance_euclidean(observed, simulated),
            Self::SumSq => distance_sumsq(observed, simulated),
        }
    }
}

fn check_shapes(a: &Dataset, b: &Dataset) -> Result<()> {
    if a.width() != b.width() || a.times() != b.times() {
        return Err(Error::Shape {
            left: a.shape_label(),
            right: b.shape_label(),
        });
    }
    Ok(())
}

pub fn distance_sumsq(a: &Dataset, b: &Dataset) -> Result<f64> {
    check_shapes(a, b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}

pub fn distance_euclidean(a: &Dataset, b: &Dataset) -> Result<f64> {
    distance_sumsq(a, b).map(libm::sqrt)
}

impl core::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s).ok_or_else(|| Error::Argument(s.to_string()))
    }
}
