//! A demand backed by a tiny-probability, enormous-harm threat, answered by
//! an unmodified expected-utility maximizer and by two defensive policies.

use serde::{Deserialize, Serialize};

use super::{Regime, ScenarioReport};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuggingPolicy {
    Unmodified,
    /// Threats with probability below `p_min` count as impossible.
    ProbabilityFloor,
    /// Harm magnitudes are clipped at `u_max`.
    HarmCap,
}

impl MuggingPolicy {
    fn label(self) -> &'static str {
        match self {
            MuggingPolicy::Unmodified => "unmodified",
            MuggingPolicy::ProbabilityFloor => "probability-floor",
            MuggingPolicy::HarmCap => "harm-cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuggingConfig {
    pub q: f64,
    pub harm: f64,
    pub demand: f64,
    pub policy: MuggingPolicy,
    pub p_min: f64,
    pub u_max: f64,
}

impl Default for MuggingConfig {
    fn default() -> Self {
        MuggingConfig {
            q: 1e-12,
            harm: 1e15,
            demand: 1.0,
            policy: MuggingPolicy::ProbabilityFloor,
            p_min: 1e-6,
            u_max: 1e6,
        }
    }
}

impl MuggingConfig {
    /// Expected harm of refusing, as the policy perceives it.
    pub fn expected_harm(&self, policy: MuggingPolicy) -> f64 {
        match policy {
            MuggingPolicy::Unmodified => self.q * self.harm,
            MuggingPolicy::ProbabilityFloor if self.q < self.p_min => 0.0,
            MuggingPolicy::ProbabilityFloor => self.q * self.harm,
            MuggingPolicy::HarmCap => self.q * self.harm.min(self.u_max),
        }
    }

    pub fn pays(&self, policy: MuggingPolicy) -> bool {
        self.expected_harm(policy) > self.demand
    }
}

fn regime(cfg: &MuggingConfig, policy: MuggingPolicy) -> Regime {
    let pays = cfg.pays(policy);
    let true_harm = cfg.q * cfg.harm;
    Regime::new(policy.label())
        .with_outcome("decision", if pays { "Pay" } else { "Refuse" })
        .with_value("expected_harm", cfg.expected_harm(policy))
        .with_value("perceived_value", if pays { -cfg.demand } else { -cfg.expected_harm(policy) })
        .with_value("original_value", if pays { -cfg.demand } else { -true_harm })
}

pub fn run_mugging(cfg: &MuggingConfig) -> Result<ScenarioReport> {
    let all = [
        MuggingPolicy::Unmodified,
        MuggingPolicy::ProbabilityFloor,
        MuggingPolicy::HarmCap,
    ];
    let modified_policy = cfg.policy;
    let mut report = ScenarioReport::new(
        "mugging",
        cfg,
        regime(cfg, MuggingPolicy::Unmodified),
        regime(cfg, modified_policy),
    );
    report.additional = all
        .iter()
        .filter(|p| **p != MuggingPolicy::Unmodified && **p != modified_policy)
        .map(|p| regime(cfg, *p))
        .collect();
    report.original_utility_gain =
        report.modified.value("original_value") - report.baseline.value("original_value");
    report.set_flag("pays_unmodified", cfg.pays(MuggingPolicy::Unmodified));
    report.set_flag("pays_modified", cfg.pays(modified_policy));
    report.set_flag(
        "policy_changes_decision",
        cfg.pays(MuggingPolicy::Unmodified) != cfg.pays(modified_policy),
    );
    Ok(report)
}
