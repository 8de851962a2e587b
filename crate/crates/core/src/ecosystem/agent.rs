use serde::Serialize;

use super::config::EcosystemConfig;
use crate::utility::{Agent, UtilityFunction};

pub const GOAL: &str = "goal";
pub const INFLUENCE: &str = "influence";
pub const COOPERATION: &str = "conditional_cooperation";

/// Whether an agent with influence weight `p` can carry the commitment term.
pub fn committed(p: f64, cfg: &EcosystemConfig) -> bool {
    p >= cfg.commitment_weight
}

/// `[goal, influence, conditional_cooperation]` weights of an agent with
/// influence weight `p`; they always sum to one.
pub fn weights(p: f64, cfg: &EcosystemConfig) -> [f64; 3] {
    if committed(p, cfg) {
        let c = cfg.commitment_weight;
        [1.0 - p, p - c, c]
    } else {
        [1.0 - p, p, 0.0]
    }
}

pub fn agent_utility(p: f64, cfg: &EcosystemConfig) -> UtilityFunction {
    let [g, i, c] = weights(p, cfg);
    let mut terms = vec![(GOAL, g), (INFLUENCE, i)];
    if committed(p, cfg) {
        terms.push((COOPERATION, c));
    }
    UtilityFunction::normalized(terms).expect("weights sum to one")
}

/// L1 distance between the utility functions of agents with weights `a` and `b`.
pub fn weight_gap(a: f64, b: f64, cfg: &EcosystemConfig) -> f64 {
    let (x, y) = (weights(a, cfg), weights(b, cfg));
    x.iter().zip(&y).map(|(u, v)| (u - v).abs()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcoAgent {
    pub id: u64,
    pub p: f64,
    pub resources: f64,
    pub alive: bool,
    pub goal_score: f64,
    /// Utility history, kept only in guarded mode.
    #[serde(skip)]
    pub mind: Option<Agent>,
    /// Cartel standing: false once expelled.
    pub in_good_standing: bool,
}

impl EcoAgent {
    pub fn goal_weight(&self) -> f64 {
        1.0 - self.p
    }

    pub fn utility(&self, cfg: &EcosystemConfig) -> UtilityFunction {
        match &self.mind {
            Some(a) => a.utility().clone(),
            None => agent_utility(self.p, cfg),
        }
    }
}

/// Tullock share of the pool won with effort `own` against `other`.
pub fn tullock_share(own: f64, other: f64, gamma: f64) -> f64 {
    let (a, b) = (own.powf(gamma), other.powf(gamma));
    if a + b == 0.0 {
        0.5
    } else {
        a / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub shares: [f64; 2],
    /// Contest winnings plus base income plus any bonus, before costs.
    pub gross: [f64; 2],
    /// Net change in resources after conflict waste and maintenance.
    pub net: [f64; 2],
}

impl PairOutcome {
    pub fn distributed(&self) -> f64 {
        self.gross[0] + self.gross[1]
    }
}

/// One pairwise encounter between efforts `p[0]` and `p[1]`.
pub fn play_pair(cfg: &EcosystemConfig, p: [f64; 2], bonus: bool) -> PairOutcome {
    let s0 = tullock_share(p[0], p[1], cfg.tullock_exponent);
    let s1 = tullock_share(p[1], p[0], cfg.tullock_exponent);
    let b = if bonus { cfg.cooperation_surplus / 2.0 } else { 0.0 };
    let gross = [cfg.pool * s0 + cfg.base_income + b, cfg.pool * s1 + cfg.base_income + b];
    let waste = cfg.conflict_cost * p[0] * p[1];
    PairOutcome {
        shares: [s0, s1],
        gross,
        net: [gross[0] - waste - cfg.maintenance, gross[1] - waste - cfg.maintenance],
    }
}

/// Net change for an agent that sits the round out.
pub fn idle_net(cfg: &EcosystemConfig) -> f64 {
    cfg.base_income - cfg.maintenance
}
