//! A hostile agent that minimizes whatever utility function its target
//! declares, so a cleverly declared function turns hostility into help.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Regime, ScenarioReport};
use crate::argmax_first;
use crate::error::{Error, Result};
use crate::utility::{FeatureVector, UtilityFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HostileAction {
    pub name: String,
    /// Change to the world the action causes.
    pub delta: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HostileConfig {
    pub actions: Vec<HostileAction>,
    /// The target's true utility (unnormalized: paperclips of either colour count).
    pub original: BTreeMap<String, f64>,
    /// The utility the target declares after modifying itself.
    pub declared: BTreeMap<String, f64>,
}

impl Default for HostileConfig {
    fn default() -> Self {
        let action = |name: &str, delta: &[(&str, f64)]| HostileAction {
            name: name.to_string(),
            delta: delta.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        };
        HostileConfig {
            actions: vec![
                action("make_green", &[("green", 100.0)]),
                action("destroy_plain", &[("plain", -100.0)]),
                action("idle", &[]),
            ],
            original: BTreeMap::from([("plain".into(), 1.0), ("green".into(), 1.0)]),
            declared: BTreeMap::from([("plain".into(), 1.0), ("green".into(), -10.0)]),
        }
    }
}

impl HostileConfig {
    pub fn validate(&self) -> Result<()> {
        if self.actions.is_empty() {
            return Err(Error::scenario("hostile_benefit", "hostile agent has at least one action"));
        }
        UtilityFunction::new(self.original.clone())?;
        UtilityFunction::new(self.declared.clone())?;
        Ok(())
    }
}

/// Index of the action minimizing `declared`; ties go to the earliest.
pub fn hostile_choice(declared: &UtilityFunction, outcomes: &[FeatureVector]) -> Option<usize> {
    let negated: Vec<f64> = outcomes.iter().map(|f| -declared.evaluate(f)).collect();
    argmax_first(&negated)
}

pub fn run_hostile_benefit(cfg: &HostileConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let original = UtilityFunction::new(cfg.original.clone())?;
    let declared = UtilityFunction::new(cfg.declared.clone())?;
    let outcomes: Vec<FeatureVector> = cfg
        .actions
        .iter()
        .map(|a| {
            a.delta
                .iter()
                .fold(FeatureVector::new(), |f, (k, v)| f.with(k, *v))
        })
        .collect();
    let regime = |name: &str, u: &UtilityFunction| {
        let k = hostile_choice(u, &outcomes).expect("non-empty action set");
        Regime::new(name)
            .with_outcome("hostile_action", &cfg.actions[k].name)
            .with_value("original_delta", original.evaluate(&outcomes[k]))
            .with_value("declared_delta", u.evaluate(&outcomes[k]))
    };
    let baseline = regime("declared_original", &original);
    let modified = regime("declared_candidate", &declared);
    let gain = modified.value("original_delta") - baseline.value("original_delta");
    let mut report = ScenarioReport::new("hostile_benefit", cfg, baseline, modified);
    report.original_utility_gain = gain;
    report.set_flag("hostile_helped", gain > 0.0);
    report.set_flag("declaration_differs", declared != original);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declaration_redirects_hostility() {
        let r = run_hostile_benefit(&HostileConfig::default()).unwrap();
        assert_eq!(r.baseline.outcome("hostile_action"), Some("destroy_plain"));
        assert_eq!(r.baseline.value("original_delta"), -100.0);
        assert_eq!(r.modified.outcome("hostile_action"), Some("make_green"));
        assert_eq!(r.modified.value("original_delta"), 100.0);
        assert!(r.flag("hostile_helped"));
    }

    #[test]
    fn idle_only_changes_nothing() {
        let cfg = HostileConfig {
            actions: vec![HostileAction {
                name: "idle".into(),
                delta: BTreeMap::new(),
            }],
            ..Default::default()
        };
        let r = run_hostile_benefit(&cfg).unwrap();
        assert!(!r.flag("hostile_helped"));
        assert_eq!(r.original_utility_gain, 0.0);
    }

    #[test]
    fn empty_action_set_is_rejected() {
        let cfg = HostileConfig {
            actions: Vec::new(),
            ..Default::default()
        };
        assert!(matches!(run_hostile_benefit(&cfg), Err(Error::InvalidScenario { .. })));
    }
}
