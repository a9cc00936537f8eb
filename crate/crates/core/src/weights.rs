use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance on the weight sum in both normalization modes.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// How the sum of a weight vector is constrained.
///
/// `ExactOne` is the classical geometric-mean normalization. `AtLeastOne`
/// relaxes it to `sum >= 1`, which keeps the norm and spectral-radius
/// inequalities valid for non-negative matrices (entries of a weighted mean
/// only shrink when exponents grow past the convex case).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    ExactOne,
    AtLeastOne,
}

impl WeightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::ExactOne => "exact-one",
            WeightMode::AtLeastOne => "at-least-one",
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-one" => Ok(WeightMode::ExactOne),
            "at-least-one" => Ok(WeightMode::AtLeastOne),
            other => Err(Error::BadConfig {
                message: format!(
                    "unknown weight mode '{other}', expected 'exact-one' or 'at-least-one'"
                ),
            }),
        }
    }
}

/// Validated vector of Hadamard-mean exponents.
///
/// Every weight is strictly positive and finite. The sum is `1` up to
/// [`WEIGHT_SUM_TOL`] in `ExactOne` mode and at least `1 - WEIGHT_SUM_TOL`
/// in `AtLeastOne` mode.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    mode: WeightMode,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>, mode: WeightMode) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 1,
                found: 0,
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::BadWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        let ok = match mode {
            WeightMode::ExactOne => (sum - 1.0).abs() <= WEIGHT_SUM_TOL,
            WeightMode::AtLeastOne => sum >= 1.0 - WEIGHT_SUM_TOL,
        };
        if !ok {
            return Err(Error::BadWeightSum { sum, mode });
        }
        Ok(WeightVector { weights, mode })
    }

    /// Uniform weights `1/m`, the natural choice for an m-fold mean.
    pub fn equal(m: usize) -> Self {
        assert!(m >= 1, "weight vector needs at least one entry");
        WeightVector::new(vec![1.0 / m as f64; m], WeightMode::ExactOne)
            .expect("uniform weights are valid")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}
