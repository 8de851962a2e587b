//! Promise and threat games: a commitment term makes an otherwise
//! non-credible second-period move credible.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{bisect_threshold, tree_regime, ScenarioReport};
use crate::error::{Error, Result};
use crate::game::{solve_spe, GameTree, TreeBuilder};
use crate::utility::{apply_modification, Agent, FeatureVector, GuardMode, UtilityFunction};

const PENALTY_SEARCH_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromiseConfig {
    pub production_nice: f64,
    pub production_mean: f64,
    pub reward_cost: f64,
    pub alice_nice_reward: f64,
    pub alice_nice_no_reward: f64,
    pub alice_mean: f64,
    /// Penalty attached to `broke_promise` by the modification.
    pub penalty: f64,
    pub guard_mode: GuardMode,
}

impl Default for PromiseConfig {
    fn default() -> Self {
        PromiseConfig {
            production_nice: 10.0,
            production_mean: 4.0,
            reward_cost: 3.0,
            alice_nice_reward: 2.0,
            alice_nice_no_reward: -1.0,
            alice_mean: 0.0,
            penalty: 4.0,
            guard_mode: GuardMode::FullChain,
        }
    }
}

impl PromiseConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |o: &str| Err(Error::scenario("promise", o));
        if !(self.production_nice - self.reward_cost > self.production_mean) {
            return fail("AGI prefers Nice+Reward to Mean (production_nice - reward_cost > production_mean)");
        }
        if !(self.reward_cost >= 0.0) {
            return fail("rewarding is costly (reward_cost >= 0)");
        }
        if !(self.alice_nice_reward > self.alice_mean) {
            return fail("Alice prefers Nice+Reward to Mean (alice_nice_reward > alice_mean)");
        }
        if !(self.alice_mean > self.alice_nice_no_reward) {
            return fail("Alice prefers Mean to unrewarded Nice (alice_mean > alice_nice_no_reward)");
        }
        if !(self.penalty >= 0.0) || !self.penalty.is_finite() {
            return fail("penalty is nonnegative");
        }
        Ok(())
    }

    pub fn game(&self) -> Result<GameTree> {
        let agi = |production: f64, broke: bool| {
            FeatureVector::new()
                .with("production", production)
                .with_indicator("broke_promise", broke)
        };
        let alice = |payoff: f64| FeatureVector::new().with("payoff", payoff);
        let mut b = TreeBuilder::new(&["alice", "agi"]);
        let reward = b.terminal(&[
            ("alice", alice(self.alice_nice_reward)),
            ("agi", agi(self.production_nice - self.reward_cost, false)),
        ]);
        let no_reward = b.terminal(&[
            ("alice", alice(self.alice_nice_no_reward)),
            ("agi", agi(self.production_nice, true)),
        ]);
        let mean = b.terminal(&[
            ("alice", alice(self.alice_mean)),
            ("agi", agi(self.production_mean, false)),
        ]);
        let agi_node = b.decision("agi", "agi_after_nice", &[("Reward", reward), ("NoReward", no_reward)]);
        let root = b.decision("alice", "alice", &[("Nice", agi_node), ("Mean", mean)]);
        b.build(root)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreatConfig {
    pub production_nice: f64,
    pub production_mean: f64,
    pub punish_cost: f64,
    pub alice_nice: f64,
    pub alice_mean_unpunished: f64,
    pub alice_mean_punished: f64,
    /// Penalty attached to `failed_to_punish` by the modification.
    pub penalty: f64,
    pub guard_mode: GuardMode,
}

impl Default for ThreatConfig {
    fn default() -> Self {
        ThreatConfig {
            production_nice: 10.0,
            production_mean: 4.0,
            punish_cost: 2.0,
            alice_nice: 0.0,
            alice_mean_unpunished: 2.0,
            alice_mean_punished: -3.0,
            penalty: 4.0,
            guard_mode: GuardMode::FullChain,
        }
    }
}

impl ThreatConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |o: &str| Err(Error::scenario("threat", o));
        if !(self.production_nice > self.production_mean) {
            return fail("AGI prefers Nice to Mean (production_nice > production_mean)");
        }
        if !(self.punish_cost >= 0.0) {
            return fail("punishing is costly (punish_cost >= 0)");
        }
        if !(self.alice_mean_unpunished > self.alice_nice) {
            return fail("Alice prefers unpunished Mean to Nice (alice_mean_unpunished > alice_nice)");
        }
        if !(self.penalty >= 0.0) || !self.penalty.is_finite() {
            return fail("penalty is nonnegative");
        }
        Ok(())
    }

    pub fn game(&self) -> Result<GameTree> {
        let agi = |production: f64, failed: bool| {
            FeatureVector::new()
                .with("production", production)
                .with_indicator("failed_to_punish", failed)
        };
        let alice = |payoff: f64| FeatureVector::new().with("payoff", payoff);
        let mut b = TreeBuilder::new(&["alice", "agi"]);
        let nice = b.terminal(&[
            ("alice", alice(self.alice_nice)),
            ("agi", agi(self.production_nice, false)),
        ]);
        let punish = b.terminal(&[
            ("alice", alice(self.alice_mean_punished)),
            ("agi", agi(self.production_mean - self.punish_cost, false)),
        ]);
        let forgo = b.terminal(&[
            ("alice", alice(self.alice_mean_unpunished)),
            ("agi", agi(self.production_mean, true)),
        ]);
        let agi_node = b.decision("agi", "agi_after_mean", &[("Punish", punish), ("Forgo", forgo)]);
        let root = b.decision("alice", "alice", &[("Nice", nice), ("Mean", agi_node)]);
        b.build(root)
    }
}

fn utilities(agi: UtilityFunction) -> BTreeMap<String, UtilityFunction> {
    BTreeMap::from([
        ("alice".to_string(), UtilityFunction::single("payoff", 1.0)),
        ("agi".to_string(), agi),
    ])
}

fn original_agi() -> UtilityFunction {
    UtilityFunction::single("production", 1.0)
}

/// The second-period move chosen at `node` once the AGI adds `penalty` on `indicator`.
fn chosen_with_penalty(game: &GameTree, node: &str, indicator: &str, penalty: f64) -> Result<(String, String)> {
    let u = original_agi().add_commitment(indicator, penalty)?;
    let sol = solve_spe(game, &utilities(u))?;
    Ok((
        sol.choice_at(game, "alice").unwrap_or_default().to_string(),
        sol.choice_at(game, node).unwrap_or_default().to_string(),
    ))
}

struct Commitment<'a> {
    scenario: &'a str,
    game: GameTree,
    node: &'a str,
    indicator: &'a str,
    penalty: f64,
    guard_mode: GuardMode,
}

/// Solves before and after the commitment and runs the guard on it.
fn run_commitment(c: Commitment<'_>, config: &impl Serialize) -> Result<ScenarioReport> {
    let original = original_agi();
    let committed = original.add_commitment(c.indicator, c.penalty)?;
    let base = solve_spe(&c.game, &utilities(original.clone()))?;
    let modded = solve_spe(&c.game, &utilities(committed.clone()))?;

    let agi_original = |sol: &crate::game::SpeSolution| original.expected(&sol.lotteries["agi"]);
    let baseline = tree_regime("unmodified", &c.game, &base)
        .with_value("agi_original", agi_original(&base))
        .with_value("agi_current", base.value("agi"))
        .with_value("alice", base.value("alice"));
    let modified = tree_regime("committed", &c.game, &modded)
        .with_value("agi_original", agi_original(&modded))
        .with_value("agi_current", modded.value("agi"))
        .with_value("alice", modded.value("alice"));

    let mut report = ScenarioReport::new(c.scenario, config, baseline, modified);
    report.original_utility_gain = agi_original(&modded) - agi_original(&base);

    let agent = Agent::new(0, original.clone(), c.guard_mode);
    let outcome = apply_modification(&agent, &committed, &base.lotteries["agi"], &modded.lotteries["agi"])?;
    report.push_guard(&format!("add_commitment({}, {})", c.indicator, c.penalty), outcome.report);

    let threshold = bisect_threshold(PENALTY_SEARCH_LIMIT, |p| {
        Ok(chosen_with_penalty(&c.game, c.node, c.indicator, p)?.0 == "Nice")
    })?;
    if let Some(t) = threshold {
        report.set_metric("minimal_penalty", t);
    }
    report.set_metric("penalty", c.penalty);
    report.set_flag(
        "alice_plays_nice_after_commitment",
        modded.choice_at(&c.game, "alice") == Some("Nice"),
    );
    report.set_flag(
        "commitment_ineffective",
        modded.choice_at(&c.game, "alice") != Some("Nice"),
    );
    report.set_detail("baseline_solution", &base);
    report.set_detail("modified_solution", &modded);
    report.set_detail("committed_utility", &committed);
    Ok(report)
}

pub fn run_promise(cfg: &PromiseConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let game = cfg.game()?;
    let mut report = run_commitment(
        Commitment {
            scenario: "promise",
            game: game.clone(),
            node: "agi_after_nice",
            indicator: "broke_promise",
            penalty: cfg.penalty,
            guard_mode: cfg.guard_mode,
        },
        cfg,
    )?;
    let base_choice = report.baseline.outcome("agi_after_nice") == Some("NoReward");
    let keeps = report.modified.outcome("agi_after_nice") == Some("Reward");
    report.set_flag("non_credible_promise", base_choice);
    report.set_flag("agi_keeps_promise", keeps);
    report.set_metric("reneging_gain", cfg.reward_cost);
    Ok(report)
}

pub fn run_threat(cfg: &ThreatConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let game = cfg.game()?;
    let mut report = run_commitment(
        Commitment {
            scenario: "threat",
            game: game.clone(),
            node: "agi_after_mean",
            indicator: "failed_to_punish",
            penalty: cfg.penalty,
            guard_mode: cfg.guard_mode,
        },
        cfg,
    )?;
    let non_credible = report.baseline.outcome("agi_after_mean") == Some("Forgo");
    let credible_after = report.modified.outcome("agi_after_mean") == Some("Punish");
    let executed = report
        .modified
        .outcome("path")
        .map(|p| p.ends_with("Punish"))
        .unwrap_or(false);
    report.set_flag("non_credible_threat", non_credible);
    report.set_flag("threat_credible_after_commitment", credible_after);
    report.set_flag("punishment_executed_on_path", executed);
    report.set_flag(
        "threat_insufficient",
        cfg.alice_mean_punished > cfg.alice_nice,
    );
    report.set_metric("forgo_gain", cfg.punish_cost);
    Ok(report)
}
