use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observer::DisclosureMode;
use crate::utility::GuardMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdaptationMode {
    /// Agents consider one-step changes of p, filtered by their guard.
    Guarded,
    /// Dead agents are replaced by mutated copies of survivors.
    #[default]
    Selection,
    /// Selection inside a cartel that caps p.
    Cartel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartelConfig {
    /// Agreed ceiling on p.
    pub cap: f64,
    /// Whether agents whose p exceeds the cap cheat; otherwise p is held at the cap.
    pub cheat: bool,
    /// Whether the partner of a cheater notices (and grim-triggers).
    pub partner_observes: bool,
    /// Probability a cheat is broadcast to every member, who then expel the cheater.
    pub gossip: f64,
}

impl Default for CartelConfig {
    fn default() -> Self {
        CartelConfig {
            cap: 0.5,
            cheat: true,
            partner_observes: true,
            gossip: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EcosystemConfig {
    /// Population size N (even).
    pub population: usize,
    pub rounds: usize,
    /// Contested pool R split between the two agents of a pair.
    pub pool: f64,
    pub base_income: f64,
    /// Maintenance m paid every round; the scarcity knob.
    pub maintenance: f64,
    pub tullock_exponent: f64,
    /// Both-aggressive waste: each agent of a pair loses `conflict_cost · p_i · p_j`.
    pub conflict_cost: f64,
    pub mode: AdaptationMode,
    /// Adaptation step δ: the guarded move size and the mutation half-width.
    pub step: f64,
    /// Per-round chance μ that a guarded agent reconsiders its p.
    pub adaptation_probability: f64,
    pub guard: GuardMode,
    /// What a guarded agent sees of its partners when predicting the next
    /// round: exact p under `full`, otherwise only the commitment term, with
    /// its own p standing in for theirs.
    pub disclosure: DisclosureMode,
    /// Cooperation surplus S shared by two committed agents.
    pub cooperation_surplus: f64,
    /// Weight an agent moves from influence to its conditional-cooperation
    /// term; agents with p below it cannot commit.
    pub commitment_weight: f64,
    pub endowment: f64,
    /// Resources above this are consumed for goal pursuit each round.
    pub reserve: f64,
    pub initial_p: [f64; 2],
    /// When non-empty, initial p values are drawn from this set instead.
    pub strategy_values: Vec<f64>,
    pub cartel: CartelConfig,
    pub seed: u64,
    /// Exact pairwise dispersion up to this many alive agents, sampled beyond.
    pub dispersion_exact_limit: usize,
    pub dispersion_samples: usize,
}

impl Default for EcosystemConfig {
    fn default() -> Self {
        EcosystemConfig {
            population: 100,
            rounds: 10_000,
            pool: 1.8,
            base_income: 0.0,
            maintenance: 1.2,
            tullock_exponent: 1.0,
            conflict_cost: 0.0,
            mode: AdaptationMode::Selection,
            step: 0.05,
            adaptation_probability: 0.05,
            guard: GuardMode::FullChain,
            disclosure: DisclosureMode::VerifiedTerms,
            cooperation_surplus: 0.6,
            commitment_weight: 0.1,
            endowment: 2.0,
            reserve: 2.0,
            initial_p: [0.0, 0.2],
            strategy_values: Vec::new(),
            cartel: CartelConfig::default(),
            seed: 0,
            dispersion_exact_limit: 200,
            dispersion_samples: 10_000,
        }
    }
}

impl EcosystemConfig {
    /// Average gross income of an agent in a symmetric, fully committed
    /// population: half the pool, the base income and half the surplus.
    pub fn income_scale(&self) -> f64 {
        self.pool / 2.0 + self.base_income + self.cooperation_surplus / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return bad(format!("population must be even and at least 2, got {}", self.population));
        }
        let nonneg = [
            ("pool", self.pool),
            ("maintenance", self.maintenance),
            ("conflict_cost", self.conflict_cost),
            ("step", self.step),
            ("cooperation_surplus", self.cooperation_surplus),
            ("endowment", self.endowment),
            ("reserve", self.reserve),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be a nonnegative number, got {v}"));
            }
        }
        if !self.base_income.is_finite() {
            return bad("base_income must be finite".into());
        }
        if !(self.tullock_exponent > 0.0) || !self.tullock_exponent.is_finite() {
            return bad("tullock_exponent must be positive".into());
        }
        if !(self.step <= 1.0) {
            return bad("step must lie in [0, 1]".into());
        }
        for (name, v) in [
            ("adaptation_probability", self.adaptation_probability),
            ("commitment_weight", self.commitment_weight),
            ("cartel.gossip", self.cartel.gossip),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        let [lo, hi] = self.initial_p;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return bad(format!("initial_p must satisfy 0 <= lo <= hi <= 1, got {:?}", self.initial_p));
        }
        if let Some(v) = self.strategy_values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return bad(format!("strategy value {v} outside [0, 1]"));
        }
        if self.mode == AdaptationMode::Cartel && !(self.cartel.cap > 0.0 && self.cartel.cap <= 1.0) {
            return bad(format!("cartel cap must lie in (0, 1], got {}", self.cartel.cap));
        }
        Ok(())
    }
}
