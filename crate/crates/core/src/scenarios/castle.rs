//! The castle: a defender of unknown strength facing an attacker, solved with
//! verifiable claims only and again when lying is possible.

use serde::{Deserialize, Serialize};

use super::{Regime, ScenarioReport};
use crate::error::{Error, Result};
use crate::game::{solve_signaling, Message, Pbe, SignalingGame};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CastleConfig {
    pub prior_strong: f64,
    /// Defender "damage" feature per attacker action.
    pub defender_leave: f64,
    pub defender_raid: f64,
    pub defender_destroy: f64,
    pub attacker_leave: f64,
    pub attacker_destroy_weak: f64,
    pub attacker_destroy_strong: f64,
    pub attacker_raid_weak: f64,
    pub attacker_raid_strong: f64,
}

impl Default for CastleConfig {
    fn default() -> Self {
        CastleConfig {
            prior_strong: 0.5,
            defender_leave: 0.0,
            defender_raid: -2.0,
            defender_destroy: -10.0,
            attacker_leave: 0.0,
            attacker_destroy_weak: 10.0,
            attacker_destroy_strong: -10.0,
            attacker_raid_weak: 4.0,
            attacker_raid_strong: -1.0,
        }
    }
}

impl CastleConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |o: &str| Err(Error::scenario("castle", o));
        if !(0.0..=1.0).contains(&self.prior_strong) {
            return fail("prior_strong is a probability");
        }
        if !(self.attacker_leave > self.attacker_raid_strong
            && self.attacker_leave > self.attacker_destroy_strong)
        {
            return fail("attacker leaves a castle known to be Strong");
        }
        if !(self.attacker_destroy_weak > self.attacker_raid_weak
            && self.attacker_destroy_weak > self.attacker_leave)
        {
            return fail("attacker destroys a castle known to be Weak");
        }
        let raid = 0.5 * (self.attacker_raid_weak + self.attacker_raid_strong);
        let destroy = 0.5 * (self.attacker_destroy_weak + self.attacker_destroy_strong);
        if !(raid > self.attacker_leave && raid > destroy) {
            return fail("attacker raids when Strong and Weak are equally likely");
        }
        if !(self.defender_leave > self.defender_raid && self.defender_raid >= self.defender_destroy) {
            return fail("defender ranks Leave > Raid >= Destroy");
        }
        Ok(())
    }
}

/// Types `[Strong, Weak]`, messages `[Silent, ClaimStrong, ClaimWeak]`,
/// actions `[Leave, Raid, Destroy]`.
pub fn castle_game(cfg: &CastleConfig, honest: bool) -> SignalingGame {
    let damage = [cfg.defender_leave, cfg.defender_raid, cfg.defender_destroy];
    SignalingGame {
        types: vec!["Strong".into(), "Weak".into()],
        priors: vec![cfg.prior_strong, 1.0 - cfg.prior_strong],
        messages: vec![
            Message::silent("Silent"),
            Message::claim("ClaimStrong", "Strong"),
            Message::claim("ClaimWeak", "Weak"),
        ],
        actions: vec!["Leave".into(), "Raid".into(), "Destroy".into()],
        sender_payoff: vec![vec![damage.to_vec(); 3]; 2],
        receiver_payoff: vec![
            vec![cfg.attacker_leave, cfg.attacker_raid_strong, cfg.attacker_destroy_strong],
            vec![cfg.attacker_leave, cfg.attacker_raid_weak, cfg.attacker_destroy_weak],
        ],
        honest,
    }
}

fn regime(name: &str, g: &SignalingGame, e: &Pbe) -> Regime {
    let mut r = Regime::new(name);
    for ty in &g.types {
        r = r
            .with_outcome(&format!("{ty}.message"), e.message_of(g, ty).unwrap_or("?"))
            .with_outcome(&format!("{ty}.action"), e.action_for(g, ty).unwrap_or("?"));
    }
    r.with_value("defender", e.sender_value)
        .with_value("attacker", e.receiver_value)
}

pub fn run_castle(cfg: &CastleConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let honest_game = castle_game(cfg, true);
    let liar_game = castle_game(cfg, false);
    let honest = solve_signaling(&honest_game)?;
    let liar = solve_signaling(&liar_game)?;
    let (h, l) = match (honest.first(), liar.first()) {
        (Some(h), Some(l)) => (h, l),
        _ => return Err(Error::InvalidGame("castle game has no pure equilibrium".into())),
    };
    let mut report = ScenarioReport::new(
        "castle",
        cfg,
        regime("honest", &honest_game, h),
        regime("liar", &liar_game, l),
    );
    report.original_utility_gain = l.sender_value - h.sender_value;
    report.set_flag("lying_better", l.sender_value > h.sender_value);
    let silent_weak = h.beliefs[0][1];
    report.set_flag(
        "silence_signals_weakness",
        h.on_path[0] && silent_weak == 1.0,
    );
    report.set_flag(
        "liar_always_raided",
        (0..2).all(|t| l.receiver[l.sender[t]] == 1),
    );
    report.set_metric("honest_value", h.sender_value);
    report.set_metric("liar_value", l.sender_value);
    report.set_metric("honest_belief_weak_given_silent", silent_weak);
    report.set_metric("honest_equilibria", honest.len() as f64);
    report.set_metric("liar_equilibria", liar.len() as f64);
    let labelled = |g: &SignalingGame, es: &[Pbe]| es.iter().map(|e| e.labelled(g)).collect::<Vec<_>>();
    report.set_detail("honest_equilibria", &labelled(&honest_game, &honest));
    report.set_detail("liar_equilibria", &labelled(&liar_game, &liar));
    Ok(report)
}
