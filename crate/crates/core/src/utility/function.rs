use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, Lottery};
use crate::error::{Error, Result};
use crate::tolerance;

/// A finite linear combination of named features.
///
/// Weights may be negative. When `normalized` is set the absolute weights sum
/// to one, which makes "fraction of weight on a concern" well defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawUtility")]
pub struct UtilityFunction {
    terms: BTreeMap<String, f64>,
    normalized: bool,
    /// Terms that are commitment indicators rather than world quantities.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    indicators: BTreeSet<String>,
}

#[derive(Deserialize)]
struct RawUtility {
    terms: BTreeMap<String, f64>,
    #[serde(default)]
    normalized: bool,
    #[serde(default)]
    indicators: BTreeSet<String>,
}

impl TryFrom<RawUtility> for UtilityFunction {
    type Error = Error;

    fn try_from(raw: RawUtility) -> Result<Self> {
        let mut u = UtilityFunction::new(raw.terms)?;
        if let Some(name) = raw.indicators.iter().find(|n| !u.terms.contains_key(*n)) {
            return Err(Error::InvalidFeatures(format!(
                "indicator `{name}` has no weight"
            )));
        }
        u.indicators = raw.indicators;
        if raw.normalized {
            if (u.l1_norm() - 1.0).abs() > tolerance::NORMALIZATION {
                return Err(Error::NotNormalized);
            }
            u.normalized = true;
        }
        Ok(u)
    }
}

impl UtilityFunction {
    /// Unnormalized utility function with the given weights.
    pub fn new<K: Into<String>>(terms: impl IntoIterator<Item = (K, f64)>) -> Result<Self> {
        let terms: BTreeMap<String, f64> = terms.into_iter().map(|(k, w)| (k.into(), w)).collect();
        if terms.is_empty() {
            return Err(Error::EmptyUtility);
        }
        if let Some((name, w)) = terms.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::InvalidFeatures(format!("weight of `{name}` is {w}")));
        }
        Ok(UtilityFunction {
            terms,
            normalized: false,
            indicators: BTreeSet::new(),
        })
    }

    /// Builds and L1-normalizes in one step.
    pub fn normalized<K: Into<String>>(terms: impl IntoIterator<Item = (K, f64)>) -> Result<Self> {
        Self::new(terms)?.renormalize()
    }

    /// Single-concern utility: `weight · feature`.
    pub fn single(feature: &str, weight: f64) -> Self {
        Self::new([(feature, weight)]).expect("a single finite term is valid")
    }

    pub fn terms(&self) -> &BTreeMap<String, f64> {
        &self.terms
    }

    pub fn weight(&self, name: &str) -> f64 {
        self.terms.get(name).copied().unwrap_or(0.0)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn is_indicator(&self, name: &str) -> bool {
        self.indicators.contains(name)
    }

    pub fn indicators(&self) -> impl Iterator<Item = &str> {
        self.indicators.iter().map(String::as_str)
    }

    /// Sorted term names.
    pub fn term_names(&self) -> Vec<String> {
        self.terms.keys().cloned().collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|w| w.abs()).sum()
    }

    pub fn evaluate(&self, features: &FeatureVector) -> f64 {
        self.terms
            .iter()
            .map(|(name, w)| w * features.get(name))
            .sum()
    }

    pub fn expected(&self, lottery: &Lottery) -> f64 {
        lottery
            .branches()
            .iter()
            .map(|b| b.probability * self.evaluate(&b.outcome))
            .sum()
    }

    /// Rescales every weight by the same positive constant so the absolute
    /// weights sum to one.
    pub fn renormalize(&self) -> Result<Self> {
        let norm = self.l1_norm();
        if norm == 0.0 {
            return Err(Error::DegenerateUtility);
        }
        if self.normalized && (norm - 1.0).abs() <= f64::EPSILON * 4.0 {
            return Ok(self.clone());
        }
        Ok(UtilityFunction {
            terms: self
                .terms
                .iter()
                .map(|(k, w)| (k.clone(), w / norm))
                .collect(),
            normalized: true,
            indicators: self.indicators.clone(),
        })
    }

    /// Multiplies every weight by `factor` (unnormalized result).
    pub fn scaled(&self, factor: f64) -> Self {
        UtilityFunction {
            terms: self
                .terms
                .iter()
                .map(|(k, w)| (k.clone(), w * factor))
                .collect(),
            normalized: false,
            indicators: self.indicators.clone(),
        }
    }

    /// Adds a disutility of `penalty` on `indicator` and renormalizes.
    ///
    /// Ratios among pre-existing terms are preserved. Adding to an existing
    /// indicator accumulates the penalty.
    pub fn add_commitment(&self, indicator: &str, penalty: f64) -> Result<Self> {
        if !(penalty >= 0.0) || !penalty.is_finite() {
            return Err(Error::InvalidPenalty(penalty));
        }
        if self.terms.contains_key(indicator) && !self.is_indicator(indicator) {
            return Err(Error::NameCollision(indicator.to_string()));
        }
        let mut terms = self.terms.clone();
        *terms.entry(indicator.to_string()).or_insert(0.0) -= penalty;
        let mut indicators = self.indicators.clone();
        indicators.insert(indicator.to_string());
        UtilityFunction {
            terms,
            normalized: false,
            indicators,
        }
        .renormalize()
    }
}

/// L1 distance between two normalized utility functions over the union of
/// their feature names.
pub fn weight_distance(a: &UtilityFunction, b: &UtilityFunction) -> Result<f64> {
    if !a.is_normalized() || !b.is_normalized() {
        return Err(Error::NotNormalized);
    }
    let names: BTreeSet<&String> = a.terms.keys().chain(b.terms.keys()).collect();
    Ok(names
        .into_iter()
        .map(|n| (a.weight(n) - b.weight(n)).abs())
        .sum())
}

/// Index of the outcome `u` ranks highest; ties go to the lowest index.
pub fn best_outcome(u: &UtilityFunction, outcomes: &[FeatureVector]) -> Option<usize> {
    let values: Vec<f64> = outcomes.iter().map(|o| u.evaluate(o)).collect();
    crate::argmax_first(&values)
}
