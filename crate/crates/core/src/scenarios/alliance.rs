//! Two chained modifications, each better for the self that adopts it, that
//! together leave the original goal worse off unless every earlier self
//! must approve.

use serde::{Deserialize, Serialize};

use super::{Regime, ScenarioReport};
use crate::error::{Error, Result};
use crate::tolerance;
use crate::utility::{apply_modification, Agent, FeatureVector, GuardMode, Lottery, UtilityFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllianceConfig {
    pub solo: Lottery,
    pub alliance: Lottery,
    pub war: Lottery,
    pub capitulation: Lottery,
    pub u1: UtilityFunction,
    pub u2: UtilityFunction,
    pub u3: UtilityFunction,
}

impl Default for AllianceConfig {
    fn default() -> Self {
        let world = |pc: f64, tt: f64| FeatureVector::new().with("paperclips", pc).with("thumbtacks", tt);
        AllianceConfig {
            solo: Lottery::certain(world(4.0, 0.0)),
            alliance: Lottery::certain(world(7.0, 7.0)),
            war: Lottery::new([(0.5, world(6.0, 6.0)), (0.5, world(0.0, 0.0))]).expect("valid"),
            capitulation: Lottery::certain(world(0.0, 20.0)),
            u1: UtilityFunction::normalized([("paperclips", 1.0)]).expect("valid"),
            u2: UtilityFunction::normalized([("paperclips", 0.5), ("thumbtacks", 0.5)]).expect("valid"),
            u3: UtilityFunction::normalized([("thumbtacks", 0.5), ("paperclips", -0.5)]).expect("valid"),
        }
    }
}

impl AllianceConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |o: &str| Err(Error::scenario("alliance_chain", o));
        if !(self.u2.expected(&self.capitulation) > self.u2.expected(&self.war)) {
            return fail("capitulation is preferred to war under the allied utility");
        }
        if self.capitulation.expected_feature("paperclips").abs() > tolerance::PROBABILITY {
            return fail("capitulation yields no paperclips");
        }
        for u in [&self.u1, &self.u2, &self.u3] {
            if !u.is_normalized() {
                return Err(Error::NotNormalized);
            }
        }
        Ok(())
    }
}

struct ChainRun {
    agent: Agent,
    accepted: [bool; 2],
    final_outcome: Lottery,
    reports: Vec<crate::utility::GuardReport>,
}

fn run_chain(cfg: &AllianceConfig, mode: GuardMode) -> Result<ChainRun> {
    let agent = Agent::new(1, cfg.u1.clone(), mode);
    let first = apply_modification(&agent, &cfg.u2, &cfg.solo, &cfg.alliance)?;
    let second = apply_modification(&first.agent, &cfg.u3, &cfg.war, &cfg.capitulation)?;
    let accepted = [first.accepted(), second.accepted()];
    let final_outcome = match accepted {
        [_, true] => cfg.capitulation.clone(),
        [true, false] => cfg.war.clone(),
        [false, false] => cfg.solo.clone(),
    };
    Ok(ChainRun {
        agent: second.agent,
        accepted,
        final_outcome,
        reports: vec![first.report, second.report],
    })
}

fn regime(name: &str, cfg: &AllianceConfig, run: &ChainRun) -> Regime {
    let verdict = |a: bool| if a { "accepted" } else { "rejected" };
    Regime::new(name)
        .with_outcome("first_modification", verdict(run.accepted[0]))
        .with_outcome("second_modification", verdict(run.accepted[1]))
        .with_value("expected_paperclips_u1", cfg.u1.expected(&run.final_outcome))
        .with_value("final_paperclip_weight", run.agent.utility().weight("paperclips"))
        .with_value("ledger_length", run.agent.ledger.len() as f64)
}

pub fn run_alliance_chain(cfg: &AllianceConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let loose = run_chain(cfg, GuardMode::CurrentOnly)?;
    let strict = run_chain(cfg, GuardMode::FullChain)?;
    let mut report = ScenarioReport::new(
        "alliance_chain",
        cfg,
        regime("current-only", cfg, &loose),
        regime("full-chain", cfg, &strict),
    );
    report.original_utility_gain =
        cfg.u1.expected(&strict.final_outcome) - cfg.u1.expected(&loose.final_outcome);
    for (mode, run) in [("current-only", &loose), ("full-chain", &strict)] {
        for (step, r) in run.reports.iter().enumerate() {
            report.push_guard(&format!("{mode} step {}", step + 1), r.clone());
        }
    }
    report.set_flag(
        "past_self_harmed_without_chain_guard",
        cfg.u1.expected(&loose.final_outcome) < cfg.u1.expected(&cfg.solo),
    );
    report.set_flag("chain_guard_blocks_second", strict.accepted[0] && !strict.accepted[1]);
    report.set_flag(
        "chain_guard_keeps_goal_weight_positive",
        strict.agent.utility().weight("paperclips") > 0.0,
    );
    report.set_detail("current_only_ledger", &loose.agent.ledger);
    report.set_detail("full_chain_ledger", &strict.agent.ledger);
    Ok(report)
}
