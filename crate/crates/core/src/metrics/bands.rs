//! Qualitative interpretation of kappa and ROC-area values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KappaBand {
    Poor,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl KappaBand {
    pub fn as_str(self) -> &'static str {
        match self {
            KappaBand::Poor => "Poor",
            KappaBand::Fair => "Fair",
            KappaBand::Moderate => "Moderate",
            KappaBand::Substantial => "Substantial",
            KappaBand::AlmostPerfect => "Almost perfect",
        }
    }
}

impl fmt::Display for KappaBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RocBand {
    /// At or below chance.
    FailAtChance,
    Fail,
    Poor,
    Fair,
    Good,
    Excellent,
}

impl RocBand {
    pub fn as_str(self) -> &'static str {
        match self {
            RocBand::FailAtChance => "Fail (≤0.5)",
            RocBand::Fail => "Fail",
            RocBand::Poor => "Poor",
            RocBand::Fair => "Fair",
            RocBand::Good => "Good",
            RocBand::Excellent => "Excellent",
        }
    }
}

impl fmt::Display for RocBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bands start at 0.21, 0.41, 0.61 and 0.81. Values falling between one
/// band's upper bound and the next band's lower bound (e.g. 0.80) stay in the
/// lower band.
pub fn interpret_kappa(k: f64) -> Result<KappaBand> {
    if !(-1.0..=1.0).contains(&k) {
        return Err(Error::structural(format!("kappa {k} outside [-1, 1]")));
    }
    Ok(if k >= 0.81 {
        KappaBand::AlmostPerfect
    } else if k >= 0.61 {
        KappaBand::Substantial
    } else if k >= 0.41 {
        KappaBand::Moderate
    } else if k >= 0.21 {
        KappaBand::Fair
    } else {
        KappaBand::Poor
    })
}

/// Half-open bands `(lo, hi]` of width 0.1 above 0.5.
pub fn interpret_roc(a: f64) -> Result<RocBand> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::structural(format!("ROC area {a} outside [0, 1]")));
    }
    Ok(if a > 0.9 {
        RocBand::Excellent
    } else if a > 0.8 {
        RocBand::Good
    } else if a > 0.7 {
        RocBand::Fair
    } else if a > 0.6 {
        RocBand::Poor
    } else if a > 0.5 {
        RocBand::Fail
    } else {
        RocBand::FailAtChance
    })
}
