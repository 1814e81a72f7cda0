//! Gaussian Jastrow factor and its lowest-order normalization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strength of short-range correlations.
///
/// `Finite(y)` gives `f(s) = 1 - exp(-y s²/b²)`; smaller `y` means a wider
/// correlation hole. The uncorrelated limit `y → ∞` is its own variant so
/// that quantities like `C(y)(1 - e^{-y s²})² - 1` are exactly zero there
/// instead of a rounding residue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CorrelationParam {
    Uncorrelated,
    Finite(f64),
}

impl CorrelationParam {
    pub fn finite(y: f64) -> Result<Self> {
        if y.is_finite() && y > 0.0 {
            Ok(CorrelationParam::Finite(y))
        } else {
            Err(Error::InvalidCorrelation(y))
        }
    }

    /// Build from the strength coordinate `ln(1/y)`; `-∞` is uncorrelated.
    pub fn from_ln_inv_y(ln_inv_y: f64) -> Result<Self> {
        if ln_inv_y == f64::NEG_INFINITY {
            Ok(CorrelationParam::Uncorrelated)
        } else {
            Self::finite((-ln_inv_y).exp())
        }
    }

    pub fn ln_inv_y(&self) -> f64 {
        match *self {
            CorrelationParam::Uncorrelated => f64::NEG_INFINITY,
            CorrelationParam::Finite(y) => -y.ln(),
        }
    }

    pub fn y(&self) -> Option<f64> {
        match *self {
            CorrelationParam::Uncorrelated => None,
            CorrelationParam::Finite(y) => Some(y),
        }
    }

    pub fn is_correlated(&self) -> bool {
        matches!(self, CorrelationParam::Finite(_))
    }
}

impl fmt::Display for CorrelationParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationParam::Uncorrelated => f.write_str("uncorrelated"),
            CorrelationParam::Finite(y) => write!(f, "y={y}"),
        }
    }
}

/// Jastrow factor at squared separation `s2` (units of `b²`).
pub fn jastrow_f(corr: CorrelationParam, s2: f64) -> f64 {
    match corr {
        CorrelationParam::Uncorrelated => 1.0,
        CorrelationParam::Finite(y) => -(-y * s2).exp_m1(),
    }
}

/// `C(y) = [1 - 2(1+2y)^{-3/2} + (1+4y)^{-3/2}]^{-1}`.
///
/// Restores unit norm of the Gaussian pair density after multiplication by
/// `f²`; it is the same constant in position and momentum space.
pub fn norm_constant(corr: CorrelationParam) -> Result<f64> {
    match corr {
        CorrelationParam::Uncorrelated => Ok(1.0),
        CorrelationParam::Finite(y) => {
            if !(y.is_finite() && y > 0.0) {
                return Err(Error::InvalidCorrelation(y));
            }
            let a = (1.0 + 2.0 * y).powf(-1.5);
            let b = (1.0 + 4.0 * y).powf(-1.5);
            Ok(1.0 / (1.0 - 2.0 * a + b))
        }
    }
}

/// Default strength grid `ln(1/y) ∈ {-4.0, -3.5, …, 0.0}`.
pub fn default_grid() -> Vec<f64> {
    (0..9).map(|i| -4.0 + 0.5 * i as f64).collect()
}
