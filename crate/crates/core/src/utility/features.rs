use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// World quantities keyed by feature name.
///
/// Indicator features (promise broken, blackmail paid, ...) are flagged and
/// always hold 0 or 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawFeatures")]
pub struct FeatureVector {
    entries: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    indicators: BTreeSet<String>,
}

#[derive(Deserialize)]
struct RawFeatures {
    entries: BTreeMap<String, f64>,
    #[serde(default)]
    indicators: BTreeSet<String>,
}

impl TryFrom<RawFeatures> for FeatureVector {
    type Error = Error;

    fn try_from(raw: RawFeatures) -> Result<Self> {
        for name in &raw.indicators {
            match raw.entries.get(name) {
                Some(v) if *v == 0.0 || *v == 1.0 => {}
                Some(v) => {
                    return Err(Error::InvalidFeatures(format!(
                        "indicator `{name}` has value {v}, expected 0 or 1"
                    )))
                }
                None => {
                    return Err(Error::InvalidFeatures(format!(
                        "indicator `{name}` has no value"
                    )))
                }
            }
        }
        if let Some((name, v)) = raw.entries.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidFeatures(format!("`{name}` is not finite ({v})")));
        }
        Ok(FeatureVector {
            entries: raw.entries,
            indicators: raw.indicators,
        })
    }
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets a quantity feature. Clears any indicator flag on the same name.
    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Sets an indicator feature to 1 (`on`) or 0.
    pub fn with_indicator(mut self, name: &str, on: bool) -> Self {
        self.set_indicator(name, on);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.indicators.remove(name);
        self.entries.insert(name.to_string(), value);
    }

    pub fn set_indicator(&mut self, name: &str, on: bool) {
        self.indicators.insert(name.to_string());
        self.entries
            .insert(name.to_string(), if on { 1.0 } else { 0.0 });
    }

    /// Value of `name`, reading absent features as 0.
    pub fn get(&self, name: &str) -> f64 {
        self.entries.get(name).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn is_indicator(&self, name: &str) -> bool {
        self.indicators.contains(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Componentwise sum; indicator flags survive only when the summed value stays in {0, 1}.
    pub fn plus(&self, other: &FeatureVector) -> FeatureVector {
        let mut out = self.clone();
        for (name, v) in other.iter() {
            let total = out.get(name) + v;
            let indicator = (self.is_indicator(name) || other.is_indicator(name))
                && (total == 0.0 || total == 1.0);
            out.entries.insert(name.to_string(), total);
            if indicator {
                out.indicators.insert(name.to_string());
            } else {
                out.indicators.remove(name);
            }
        }
        out
    }
}

/// One branch of a lottery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub probability: f64,
    pub outcome: FeatureVector,
}

/// A finite distribution over world outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Branch>", into = "Vec<Branch>")]
pub struct Lottery {
    branches: Vec<Branch>,
}

impl TryFrom<Vec<Branch>> for Lottery {
    type Error = Error;

    fn try_from(branches: Vec<Branch>) -> Result<Self> {
        Lottery::from_branches(branches)
    }
}

impl From<Lottery> for Vec<Branch> {
    fn from(l: Lottery) -> Self {
        l.branches
    }
}

impl Lottery {
    /// Builds a lottery from `(probability, outcome)` pairs.
    pub fn new(branches: impl IntoIterator<Item = (f64, FeatureVector)>) -> Result<Self> {
        Self::from_branches(
            branches
                .into_iter()
                .map(|(probability, outcome)| Branch {
                    probability,
                    outcome,
                })
                .collect(),
        )
    }

    fn from_branches(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidLottery("no branches".into()));
        }
        let mut total = 0.0;
        for b in &branches {
            if !(b.probability >= 0.0) || !b.probability.is_finite() {
                return Err(Error::InvalidLottery(format!(
                    "probability {} is not a nonnegative number",
                    b.probability
                )));
            }
            total += b.probability;
        }
        if (total - 1.0).abs() > tolerance::PROBABILITY {
            return Err(Error::InvalidLottery(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Lottery { branches })
    }

    /// The degenerate lottery paying `outcome` for sure.
    pub fn certain(outcome: FeatureVector) -> Self {
        Lottery {
            branches: vec![Branch {
                probability: 1.0,
                outcome,
            }],
        }
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Probability-weighted mean of every feature. Expected utility is linear,
    /// so evaluating a utility function on this vector equals its expectation.
    pub fn mean_features(&self) -> FeatureVector {
        let mut sums: BTreeMap<String, f64> = BTreeMap::new();
        for b in &self.branches {
            for (name, v) in b.outcome.iter() {
                *sums.entry(name.to_string()).or_insert(0.0) += b.probability * v;
            }
        }
        let mut out = FeatureVector::new();
        for (name, v) in sums {
            out.set(&name, v);
        }
        out
    }

    /// Expected value of a single feature.
    pub fn expected_feature(&self, name: &str) -> f64 {
        self.branches
            .iter()
            .map(|b| b.probability * b.outcome.get(name))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_features_read_as_zero() {
        let f = FeatureVector::new().with("paperclips", 3.0);
        assert_eq!(f.get("thumbtacks"), 0.0);
        assert_eq!(f.get("paperclips"), 3.0);
    }

    #[test]
    fn indicator_json_is_validated() {
        let ok: FeatureVector =
            serde_json::from_str(r#"{"entries":{"broke_promise":1},"indicators":["broke_promise"]}"#)
                .unwrap();
        assert!(ok.is_indicator("broke_promise"));
        let bad = serde_json::from_str::<FeatureVector>(
            r#"{"entries":{"broke_promise":0.5},"indicators":["broke_promise"]}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn lottery_rejects_bad_probabilities() {
        let f = FeatureVector::new();
        assert!(matches!(
            Lottery::new([(0.5, f.clone()), (0.4, f.clone())]),
            Err(Error::InvalidLottery(_))
        ));
        assert!(Lottery::new([(-0.1, f.clone()), (1.1, f.clone())]).is_err());
        assert!(Lottery::new(Vec::new()).is_err());
        assert!(Lottery::new([(1e-12, f.clone()), (1.0 - 1e-12, f)]).is_ok());
    }

    #[test]
    fn lottery_json_rejects_off_simplex() {
        let bad = r#"[{"probability":0.7,"outcome":{"entries":{}}}]"#;
        assert!(serde_json::from_str::<Lottery>(bad).is_err());
    }

    #[test]
    fn mean_features_mixes_branches() {
        let l = Lottery::new([
            (0.25, FeatureVector::new().with("x", 4.0)),
            (0.75, FeatureVector::new().with("x", 8.0).with("y", 1.0)),
        ])
        .unwrap();
        let m = l.mean_features();
        assert_eq!(m.get("x"), 7.0);
        assert_eq!(m.get("y"), 0.75);
    }
}
