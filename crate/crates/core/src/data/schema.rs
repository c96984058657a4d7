use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The 16 code metrics, in model input order.
pub const FEATURE_NAMES: [&str; 16] = [
    "TLOC", "NCLOC", "CLOC", "EXEC", "DC", "NOT", "NOTa", "NOTc", "NOTe", "RFC", "WMC", "DIT",
    "NOC", "DIP", "LCOM", "NOA",
];

pub const NUM_FEATURES: usize = FEATURE_NAMES.len();

/// Name of the binary label column (1 = God Class).
pub const LABEL_COLUMN: &str = "is_god_class";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    names: Vec<String>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema {
            names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl FeatureSchema {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Column index of each feature within `header`, matched case-insensitively.
    pub fn locate(&self, header: &[&str]) -> Result<Vec<usize>> {
        self.names
            .iter()
            .map(|name| {
                position_ci(header, name).ok_or_else(|| Error::Schema {
                    column: name.clone(),
                })
            })
            .collect()
    }
}

pub(crate) fn position_ci(header: &[&str], name: &str) -> Option<usize> {
    header
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case(name))
}

/// One class instance: 16 metric values and its God-Class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<S = f64> {
    pub features: Vec<S>,
    /// 0 = Not God Class, 1 = God Class.
    pub label: u8,
}

impl<S: Scalar> Sample<S> {
    pub fn new(features: Vec<S>, label: u8) -> Result<Self> {
        if features.len() != NUM_FEATURES {
            return Err(Error::structural(format!(
                "sample needs {NUM_FEATURES} features, got {}",
                features.len()
            )));
        }
        if label > 1 {
            return Err(Error::structural(format!("label {label} is not binary")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("non-finite feature value"));
        }
        Ok(Sample { features, label })
    }

    pub fn is_positive(&self) -> bool {
        self.label == 1
    }

    pub fn cast<T: Scalar>(&self) -> Sample<T> {
        Sample {
            features: self
                .features
                .iter()
                .map(|v| T::of(v.to_f64_lossy()))
                .collect(),
            label: self.label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<S = f64> {
    pub name: String,
    pub samples: Vec<Sample<S>>,
}

impl<S: Scalar> Dataset<S> {
    pub fn new(name: impl Into<String>, samples: Vec<Sample<S>>) -> Self {
        Dataset {
            name: name.into(),
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(negatives, positives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.samples.iter().filter(|s| s.is_positive()).count();
        (self.samples.len() - pos, pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (neg, pos) = self.class_counts();
        neg > 0 && pos > 0
    }

    /// Fraction of samples in the larger class.
    pub fn majority_rate(&self) -> f64 {
        let (neg, pos) = self.class_counts();
        neg.max(pos) as f64 / self.len().max(1) as f64
    }

    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Self {
        Dataset::new(
            name,
            indices.iter().map(|&i| self.samples[i].clone()).collect(),
        )
    }

    /// Concatenation of several datasets, in argument order.
    pub fn concat<'a>(
        name: impl Into<String>,
        parts: impl IntoIterator<Item = &'a Dataset<S>>,
    ) -> Self {
        Dataset::new(
            name,
            parts
                .into_iter()
                .flat_map(|d| d.samples.iter().cloned())
                .collect(),
        )
    }

    pub fn cast<T: Scalar>(&self) -> Dataset<T> {
        Dataset::new(
            self.name.clone(),
            self.samples.iter().map(Sample::cast).collect(),
        )
    }

    /// Borrowed `(features, label)` pairs, the shape the model consumes.
    pub fn examples(&self) -> impl Iterator<Item = (&[S], usize)> {
        self.samples
            .iter()
            .map(|s| (s.features.as_slice(), s.label as usize))
    }
}
