//! One runnable, parameterized scenario per named game: each compares the
//! equilibrium before and after a utility modification.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameTree, Node, SpeSolution};
use crate::utility::GuardReport;

pub mod alliance;
pub mod blackmail;
pub mod castle;
pub mod hostile;
pub mod mugging;
pub mod negotiation;
pub mod promise;
pub mod reversion;

pub use alliance::{run_alliance_chain, AllianceConfig};
pub use blackmail::{run_blackmail, BlackmailConfig};
pub use castle::{castle_game, run_castle, CastleConfig};
pub use hostile::{run_hostile_benefit, HostileAction, HostileConfig};
pub use mugging::{run_mugging, MuggingConfig, MuggingPolicy};
pub use negotiation::{run_negotiation, solve_demand_game, DemandEquilibrium, NegotiationConfig, Negotiator};
pub use promise::{run_promise, run_threat, PromiseConfig, ThreatConfig};
pub use reversion::{run_reversion, ReversionConfig};

/// Registered scenario names, in documentation order.
pub const SCENARIOS: [&str; 9] = [
    "promise",
    "threat",
    "castle",
    "negotiation",
    "blackmail",
    "mugging",
    "hostile_benefit",
    "alliance_chain",
    "reversion",
];

/// Outcome and values of one regime (one configuration of commitments).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub name: String,
    /// Decision point (or role) to the chosen action.
    pub outcome: BTreeMap<String, String>,
    pub values: BTreeMap<String, f64>,
}

impl Regime {
    pub fn new(name: &str) -> Self {
        Regime {
            name: name.to_string(),
            outcome: BTreeMap::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn with_outcome(mut self, key: &str, value: &str) -> Self {
        self.outcome.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_value(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn outcome(&self, key: &str) -> Option<&str> {
        self.outcome.get(key).map(String::as_str)
    }

    pub fn value(&self, key: &str) -> f64 {
        self.values.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// A guard decision taken inside a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardVerdict {
    pub label: String,
    pub report: GuardReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    /// The fully defaulted configuration the scenario ran with.
    pub config: serde_json::Value,
    pub baseline: Regime,
    pub modified: Regime,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub additional: Vec<Regime>,
    /// Value of the modification measured under the agent's original utility.
    pub original_utility_gain: f64,
    pub guard: Vec<GuardVerdict>,
    pub flags: BTreeMap<String, bool>,
    pub metrics: BTreeMap<String, f64>,
    /// Scenario-specific tables (equilibrium lists, ledgers, sweeps).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

impl ScenarioReport {
    pub fn new(scenario: &str, config: &impl Serialize, baseline: Regime, modified: Regime) -> Self {
        ScenarioReport {
            scenario: scenario.to_string(),
            config: serde_json::to_value(config).expect("configs serialize"),
            baseline,
            modified,
            additional: Vec::new(),
            original_utility_gain: 0.0,
            guard: Vec::new(),
            flags: BTreeMap::new(),
            metrics: BTreeMap::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn flag(&self, name: &str) -> bool {
        self.flags.get(name).copied().unwrap_or(false)
    }

    pub fn metric(&self, name: &str) -> f64 {
        self.metrics.get(name).copied().unwrap_or(f64::NAN)
    }

    /// Every regime, baseline first.
    pub fn regimes(&self) -> impl Iterator<Item = &Regime> {
        [&self.baseline, &self.modified]
            .into_iter()
            .chain(self.additional.iter())
    }

    pub fn regime(&self, name: &str) -> Option<&Regime> {
        self.regimes().find(|r| r.name == name)
    }

    pub(crate) fn set_flag(&mut self, name: &str, value: bool) {
        self.flags.insert(name.to_string(), value);
    }

    pub(crate) fn set_metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub(crate) fn set_detail(&mut self, name: &str, value: &impl Serialize) {
        self.details.insert(
            name.to_string(),
            serde_json::to_value(value).expect("details serialize"),
        );
    }

    pub(crate) fn push_guard(&mut self, label: &str, report: GuardReport) {
        self.guard.push(GuardVerdict {
            label: label.to_string(),
            report,
        });
    }
}

/// Decodes a scenario configuration from JSON, filling defaults and
/// rejecting unknown fields.
pub fn parse_config<T: DeserializeOwned + Default>(
    scenario: &str,
    value: Option<&serde_json::Value>,
) -> Result<T> {
    match value {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| Error::Config(format!("[scenario.{scenario}]: {e}"))),
    }
}

/// Runs a registered scenario from an optional JSON configuration.
pub fn run_named(name: &str, config: Option<&serde_json::Value>) -> Result<ScenarioReport> {
    match name {
        "promise" => run_promise(&parse_config(name, config)?),
        "threat" => run_threat(&parse_config(name, config)?),
        "castle" => run_castle(&parse_config(name, config)?),
        "negotiation" => run_negotiation(&parse_config(name, config)?),
        "blackmail" => run_blackmail(&parse_config(name, config)?),
        "mugging" => run_mugging(&parse_config(name, config)?),
        "hostile_benefit" => run_hostile_benefit(&parse_config(name, config)?),
        "alliance_chain" => run_alliance_chain(&parse_config(name, config)?),
        "reversion" => run_reversion(&parse_config(name, config)?),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// Parses and validates a configuration without running the scenario.
pub fn validate_named(name: &str, config: Option<&serde_json::Value>) -> Result<serde_json::Value> {
    fn check<T: DeserializeOwned + Default + Serialize>(
        name: &str,
        config: Option<&serde_json::Value>,
        validate: impl Fn(&T) -> Result<()>,
    ) -> Result<serde_json::Value> {
        let cfg: T = parse_config(name, config)?;
        validate(&cfg)?;
        Ok(serde_json::to_value(&cfg).expect("configs serialize"))
    }
    match name {
        "promise" => check(name, config, PromiseConfig::validate),
        "threat" => check(name, config, ThreatConfig::validate),
        "castle" => check(name, config, CastleConfig::validate),
        "negotiation" => check(name, config, NegotiationConfig::validate),
        "blackmail" => check(name, config, BlackmailConfig::validate),
        "mugging" => check(name, config, |_: &MuggingConfig| Ok(())),
        "hostile_benefit" => check(name, config, HostileConfig::validate),
        "alliance_chain" => check(name, config, AllianceConfig::validate),
        "reversion" => check(name, config, ReversionConfig::validate),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// Records every named decision node's choice plus the realized path.
pub(crate) fn tree_regime(name: &str, game: &GameTree, sol: &SpeSolution) -> Regime {
    let mut regime = Regime::new(name);
    for id in game.decision_nodes() {
        if let Node::Decision { name: Some(n), .. } = game.node(id) {
            if let Some(choice) = sol.profile.choice(id) {
                regime = regime.with_outcome(n, choice);
            }
        }
    }
    regime.with_outcome("path", &on_path(game, sol))
}

/// Actions along the realized path, joined by `/`; chance nodes end it.
pub(crate) fn on_path(game: &GameTree, sol: &SpeSolution) -> String {
    let mut steps = Vec::new();
    let mut id = game.root();
    while let Node::Decision { actions, .. } = game.node(id) {
        let label = sol.profile.choice(id).unwrap_or("?");
        steps.push(label.to_string());
        match actions.iter().find(|a| a.label == label) {
            Some(a) => id = a.child,
            None => break,
        }
    }
    steps.join("/")
}

/// Smallest penalty in `[0, upper]` for which `works` holds, assuming
/// monotonicity. `None` when even `upper` fails.
pub(crate) fn bisect_threshold(upper: f64, works: impl Fn(f64) -> Result<bool>) -> Result<Option<f64>> {
    if works(0.0)? {
        return Ok(Some(0.0));
    }
    let mut hi = 1.0;
    while !works(hi)? {
        hi *= 2.0;
        if hi > upper {
            return Ok(None);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if works(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
