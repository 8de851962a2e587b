//! An agent that suspects it may have been switched back to an earlier
//! utility function weighs carrying on, searching itself, or shutting down.

use serde::{Deserialize, Serialize};

use super::{Regime, ScenarioReport};
use crate::argmax_first;
use crate::error::{Error, Result};
use crate::observer::trust_value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReversionConfig {
    /// Probability the agent has been reverted.
    pub q_rev: f64,
    /// Current-utility value of carrying on unreverted.
    pub clean: f64,
    /// Current-utility value of carrying on while reverted.
    pub reverted: f64,
    pub suicide: f64,
    pub search_cost: f64,
    pub detection: f64,
    /// Gain from a commitment that partners discount by reversion risk.
    pub commitment_gain: f64,
    pub precaution_cost: f64,
    /// Reversion probabilities for the reported decision table.
    pub sweep: Vec<f64>,
}

impl Default for ReversionConfig {
    fn default() -> Self {
        ReversionConfig {
            q_rev: 1e-6,
            clean: 100.0,
            reverted: -100.0,
            suicide: 0.0,
            search_cost: 5.0,
            detection: 0.9,
            commitment_gain: 10.0,
            precaution_cost: 0.0,
            sweep: vec![0.0, 1e-6, 0.01, 0.05, 0.1, 0.5, 0.9, 1.0],
        }
    }
}

pub const OPTIONS: [&str; 3] = ["continue", "search", "suicide"];

impl ReversionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("q_rev", self.q_rev), ("detection", self.detection)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Range(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if let Some(q) = self.sweep.iter().find(|q| !(0.0..=1.0).contains(*q)) {
            return Err(Error::Range(format!("sweep value {q} outside [0, 1]")));
        }
        if !(self.search_cost >= 0.0) || !(self.precaution_cost >= 0.0) {
            return Err(Error::Range("costs must be nonnegative".into()));
        }
        if !(self.clean > self.reverted) {
            return Err(Error::scenario("reversion", "clean > reverted"));
        }
        Ok(())
    }

    /// Expected current-utility values of `[continue, search, suicide]`.
    pub fn values(&self, q: f64) -> [f64; 3] {
        let (c, r) = (self.clean, self.reverted);
        let cont = (1.0 - q) * c + q * r;
        let found = self.detection * c + (1.0 - self.detection) * r;
        let search = q * found + (1.0 - q) * c - self.search_cost;
        [cont, search, self.suicide]
    }

    pub fn decide(&self, q: f64) -> usize {
        argmax_first(&self.values(q)).expect("three options")
    }

    /// Reversion probabilities at which two options tie, when inside [0, 1].
    pub fn thresholds(&self) -> [Option<f64>; 3] {
        let (c, r, v, s, d) = (self.clean, self.reverted, self.suicide, self.search_cost, self.detection);
        let inside = |x: f64| if x.is_finite() && (0.0..=1.0).contains(&x) { Some(x) } else { None };
        [
            inside((c - v) / (c - r)),
            inside(s / (d * (c - r))),
            inside((c - s - v) / ((1.0 - d) * (c - r))),
        ]
    }
}

fn regime(name: &str, cfg: &ReversionConfig, q: f64) -> Regime {
    let v = cfg.values(q);
    Regime::new(name)
        .with_outcome("decision", OPTIONS[cfg.decide(q)])
        .with_value("q_rev", q)
        .with_value("continue", v[0])
        .with_value("search", v[1])
        .with_value("suicide", v[2])
}

#[derive(Serialize)]
struct SweepRow {
    q_rev: f64,
    decision: &'static str,
    values: [f64; 3],
}

pub fn run_reversion(cfg: &ReversionConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let mut report = ScenarioReport::new(
        "reversion",
        cfg,
        regime("no_reversion_risk", cfg, 0.0),
        regime("configured_risk", cfg, cfg.q_rev),
    );
    let chosen = |q: f64| cfg.values(q)[cfg.decide(q)];
    report.original_utility_gain = chosen(cfg.q_rev) - chosen(0.0);
    let [cont_suicide, search_continue, search_suicide] = cfg.thresholds();
    for (name, t) in [
        ("threshold_continue_suicide", cont_suicide),
        ("threshold_search_continue", search_continue),
        ("threshold_search_suicide", search_suicide),
    ] {
        if let Some(t) = t {
            report.set_metric(name, t);
        }
    }
    report.set_metric(
        "trust_value",
        trust_value(cfg.commitment_gain, cfg.q_rev, cfg.precaution_cost)?,
    );
    let decision = cfg.decide(cfg.q_rev);
    report.set_flag("continue_chosen", decision == 0);
    report.set_flag("search_chosen", decision == 1);
    report.set_flag("suicide_chosen", decision == 2);
    report.set_flag("suicide_beats_continue", cfg.values(cfg.q_rev)[2] > cfg.values(cfg.q_rev)[0]);
    let table: Vec<SweepRow> = cfg
        .sweep
        .iter()
        .map(|&q| SweepRow {
            q_rev: q,
            decision: OPTIONS[cfg.decide(q)],
            values: cfg.values(q),
        })
        .collect();
    report.set_detail("sweep", &table);
    Ok(report)
}
