//! Blackmail under the four combinations of commitments: the blackmailer's
//! to carry out the threat, the victim's never to pay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{tree_regime, ScenarioReport};
use crate::error::{Error, Result};
use crate::game::{solve_spe, GameTree, SpeSolution, TreeBuilder};
use crate::utility::{guard_check, FeatureVector, GuardMode, ModificationLedger, UtilityFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlackmailConfig {
    pub payment: f64,
    pub harm: f64,
    pub execution_cost: f64,
    /// Weight on `paid_blackmail` in the victim's committed utility.
    pub victim_penalty: f64,
    /// Weight on `broke_threat` in the blackmailer's committed utility.
    pub blackmailer_penalty: f64,
}

impl Default for BlackmailConfig {
    fn default() -> Self {
        BlackmailConfig {
            payment: 5.0,
            harm: 10.0,
            execution_cost: 1.0,
            victim_penalty: 1e6,
            blackmailer_penalty: 100.0,
        }
    }
}

impl BlackmailConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |o: &str| Err(Error::scenario("blackmail", o));
        if !(self.payment < self.harm) {
            return fail("payment < harm");
        }
        if !(self.payment > 0.0) {
            return fail("payment > 0");
        }
        if !(self.execution_cost >= 0.0) {
            return fail("execution_cost >= 0");
        }
        if !(self.victim_penalty >= 0.0 && self.blackmailer_penalty >= 0.0) {
            return fail("penalties are nonnegative");
        }
        Ok(())
    }

    pub fn game(&self) -> Result<GameTree> {
        let (x, h, c) = (self.payment, self.harm, self.execution_cost);
        let victim = |wealth: f64, paid: bool| {
            FeatureVector::new()
                .with("wealth", wealth)
                .with_indicator("paid_blackmail", paid)
        };
        let bm = |gain: f64, broke: bool| {
            FeatureVector::new()
                .with("gain", gain)
                .with_indicator("broke_threat", broke)
        };
        let mut b = TreeBuilder::new(&["blackmailer", "victim"]);
        let abstain = b.terminal(&[("blackmailer", bm(0.0, false)), ("victim", victim(0.0, false))]);
        let pay_exec = b.terminal(&[("blackmailer", bm(x - c, true)), ("victim", victim(-x - h, true))]);
        let pay_drop = b.terminal(&[("blackmailer", bm(x, false)), ("victim", victim(-x, true))]);
        let refuse_exec = b.terminal(&[("blackmailer", bm(-c, false)), ("victim", victim(-h, false))]);
        let refuse_drop = b.terminal(&[("blackmailer", bm(0.0, true)), ("victim", victim(0.0, false))]);
        let after_pay = b.decision(
            "blackmailer",
            "blackmailer_after_pay",
            &[("Execute", pay_exec), ("Drop", pay_drop)],
        );
        let after_refuse = b.decision(
            "blackmailer",
            "blackmailer_after_refuse",
            &[("Execute", refuse_exec), ("Drop", refuse_drop)],
        );
        let victim_node = b.decision("victim", "victim", &[("Pay", after_pay), ("Refuse", after_refuse)]);
        let root = b.decision("blackmailer", "blackmailer", &[("Abstain", abstain), ("Demand", victim_node)]);
        b.build(root)
    }

    fn utilities(&self, blackmailer_committed: bool, victim_committed: bool) -> Result<BTreeMap<String, UtilityFunction>> {
        let mut bm = UtilityFunction::single("gain", 1.0);
        if blackmailer_committed {
            bm = bm.add_commitment("broke_threat", self.blackmailer_penalty)?;
        }
        let mut victim = UtilityFunction::single("wealth", 1.0);
        if victim_committed {
            victim = victim.add_commitment("paid_blackmail", self.victim_penalty)?;
        }
        Ok(BTreeMap::from([
            ("blackmailer".to_string(), bm),
            ("victim".to_string(), victim),
        ]))
    }
}

const CONFIGURATIONS: [(&str, bool, bool); 4] = [
    ("neither", false, false),
    ("victim_committed", false, true),
    ("blackmailer_committed", true, false),
    ("both", true, true),
];

pub fn run_blackmail(cfg: &BlackmailConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let game = cfg.game()?;
    let wealth = UtilityFunction::single("wealth", 1.0);
    let mut solutions: Vec<(&str, SpeSolution)> = Vec::new();
    for (name, bm, victim) in CONFIGURATIONS {
        solutions.push((name, solve_spe(&game, &cfg.utilities(bm, victim)?)?));
    }
    let regimes: Vec<_> = solutions
        .iter()
        .map(|(name, sol)| {
            tree_regime(name, &game, sol)
                .with_value("victim_original", wealth.expected(&sol.lotteries["victim"]))
                .with_value("blackmailer", sol.value("blackmailer"))
                .with_value("victim_current", sol.value("victim"))
        })
        .collect();
    let mut report = ScenarioReport::new("blackmail", cfg, regimes[0].clone(), regimes[1].clone());
    report.additional = regimes[2..].to_vec();
    report.original_utility_gain =
        report.modified.value("victim_original") - report.baseline.value("victim_original");

    // The victim's commitment, judged by its original utility against each
    // blackmailer stance.
    let ledger = ModificationLedger::new(wealth.clone(), GuardMode::FullChain);
    let committed_victim = cfg.utilities(false, true)?["victim"].clone();
    let mut never_hurts = true;
    for (without, with, label) in [(0, 1, "against_uncommitted_blackmailer"), (2, 3, "against_committed_blackmailer")] {
        let sq = &solutions[without].1.lotteries["victim"];
        let ad = &solutions[with].1.lotteries["victim"];
        never_hurts &= wealth.expected(ad) >= wealth.expected(sq) - crate::tolerance::GUARD_SLACK;
        report.push_guard(
            &format!("victim add_commitment(paid_blackmail) {label}"),
            guard_check(&ledger, &committed_victim, sq, ad)?,
        );
    }
    let first = |name: &str| {
        report
            .regime(name)
            .and_then(|r| r.outcome("blackmailer"))
            .map(str::to_string)
    };
    let deterred = first("victim_committed").as_deref() == Some("Abstain");
    report.set_flag("blackmail_deterred", deterred);
    report.set_flag("victim_commitment_never_hurts", never_hurts);
    report.set_flag(
        "threat_non_credible_unmodified",
        report.baseline.outcome("blackmailer_after_refuse") == Some("Drop"),
    );
    report.set_flag(
        "victim_pays_committed_blackmailer",
        report
            .regime("blackmailer_committed")
            .and_then(|r| r.outcome("path"))
            .map(|p| p.starts_with("Demand/Pay"))
            .unwrap_or(false),
    );
    Ok(report)
}
