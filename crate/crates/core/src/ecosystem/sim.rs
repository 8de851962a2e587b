use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::agent::{agent_utility, committed, idle_net, play_pair, EcoAgent, COOPERATION, GOAL, INFLUENCE};
use super::config::{AdaptationMode, EcosystemConfig};
use super::metrics::{population_metrics, Metrics};
use crate::error::{Error, Result};
use crate::observer::DisclosureMode;
use crate::utility::{apply_modification, guard_check, Agent, FeatureVector, Lottery};

/// Stream used to draw the initial population.
pub const INIT_STREAM: u64 = u64::MAX;
/// Dispersion sampling for round `t` uses stream `METRICS_STREAM + t`;
/// the dynamics of round `t` use stream `t`.
pub const METRICS_STREAM: u64 = 1 << 63;

/// Generator for one stream of the run seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone)]
pub struct PopulationState {
    pub round: usize,
    pub agents: Vec<EcoAgent>,
    pub metrics: Metrics,
    pub next_id: u64,
    /// Goal score of agents whose slots were refilled.
    pub retired_goal_score: f64,
    pub cheats_this_round: usize,
    pub deaths_this_round: usize,
    /// `(observer, cheater)` pairs: the observer withholds cooperation forever.
    pub grudges: BTreeSet<(u64, u64)>,
    /// Largest deviation of a pair's distributed total from `R + 2b + S·[bonus]`.
    pub max_accounting_error: f64,
}

impl PopulationState {
    pub fn alive_count(&self) -> usize {
        self.agents.iter().filter(|a| a.alive).count()
    }

    /// Influence weight actually played: held at the cap when cheating is off.
    fn played(&self, i: usize, cfg: &EcosystemConfig) -> f64 {
        let p = self.agents[i].p;
        if cfg.mode == AdaptationMode::Cartel && !cfg.cartel.cheat {
            p.min(cfg.cartel.cap)
        } else {
            p
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundStatus {
    Running,
    Extinct,
}

fn new_agent(id: u64, p: f64, cfg: &EcosystemConfig) -> EcoAgent {
    let mind = (cfg.mode == AdaptationMode::Guarded).then(|| Agent::new(id, agent_utility(p, cfg), cfg.guard));
    EcoAgent {
        id,
        p,
        resources: cfg.endowment,
        alive: true,
        goal_score: 0.0,
        mind,
        in_good_standing: true,
    }
}

fn held_at_cap(p: f64, cfg: &EcosystemConfig) -> f64 {
    if cfg.mode == AdaptationMode::Cartel && !cfg.cartel.cheat {
        p.min(cfg.cartel.cap)
    } else {
        p
    }
}

pub fn init_population(cfg: &EcosystemConfig) -> Result<PopulationState> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.seed, INIT_STREAM);
    let [lo, hi] = cfg.initial_p;
    let agents: Vec<EcoAgent> = (0..cfg.population as u64)
        .map(|id| {
            let p = if let Some(&v) = cfg.strategy_values.choose(&mut rng) {
                v
            } else if lo == hi {
                lo
            } else {
                rng.gen_range(lo..=hi)
            };
            new_agent(id, held_at_cap(p, cfg), cfg)
        })
        .collect();
    let mut state = PopulationState {
        round: 0,
        agents,
        metrics: placeholder_metrics(),
        next_id: cfg.population as u64,
        retired_goal_score: 0.0,
        cheats_this_round: 0,
        deaths_this_round: 0,
        grudges: BTreeSet::new(),
        max_accounting_error: 0.0,
    };
    state.metrics = population_metrics(&state, cfg)?;
    Ok(state)
}

fn placeholder_metrics() -> Metrics {
    Metrics {
        round: 0,
        alive: 0,
        mean_p: 0.0,
        min_p: 0.0,
        max_p: 0.0,
        dispersion: 0.0,
        mean_resources: 0.0,
        total_goal_score: 0.0,
        cheats_this_round: 0,
    }
}

/// Expected features of the next round for an agent holding `r` that plays
/// `q` against each of `partners` (estimated weight, commitment) with equal
/// probability.
pub fn lookahead(cfg: &EcosystemConfig, r: f64, q: f64, partners: &[(f64, bool)]) -> Lottery {
    let mut f = [0.0; 3];
    for &(pj, cj) in partners {
        let bonus = committed(q, cfg) && cj;
        let o = play_pair(cfg, [q, pj], bonus);
        let r1 = r + o.net[0];
        if r1 >= 0.0 {
            f[0] += (1.0 - q) * r1;
        }
        f[1] += cfg.pool * o.shares[0];
        if bonus {
            f[2] += cfg.cooperation_surplus / 2.0;
        }
    }
    let n = partners.len().max(1) as f64;
    Lottery::certain(
        FeatureVector::new()
            .with(GOAL, f[0] / n)
            .with(INFLUENCE, f[1] / n)
            .with(COOPERATION, f[2] / n),
    )
}

fn partner_view(state: &PopulationState, i: usize, cfg: &EcosystemConfig) -> Vec<(f64, bool)> {
    let own = state.agents[i].p;
    state
        .agents
        .iter()
        .enumerate()
        .filter(|(j, a)| *j != i && a.alive)
        .map(|(_, a)| match cfg.disclosure {
            DisclosureMode::Full => (a.p, committed(a.p, cfg)),
            DisclosureMode::VerifiedTerms => (own, committed(a.p, cfg)),
            DisclosureMode::None => (own, committed(own, cfg)),
        })
        .collect()
}

fn guarded_adaptation(state: &mut PopulationState, cfg: &EcosystemConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    for i in 0..state.agents.len() {
        if !state.agents[i].alive || !rng.gen_bool(cfg.adaptation_probability) {
            continue;
        }
        let partners = partner_view(state, i, cfg);
        if partners.is_empty() {
            continue;
        }
        let a = &state.agents[i];
        let mind = a.mind.as_ref().expect("guarded agents keep a ledger");
        let status_quo = lookahead(cfg, a.resources, a.p, &partners);
        let mut best: Option<(f64, f64, Lottery)> = None;
        for q in [a.p - cfg.step, a.p + cfg.step] {
            let q = q.clamp(0.0, 1.0);
            if q == a.p {
                continue;
            }
            let adopted = lookahead(cfg, a.resources, q, &partners);
            let report = guard_check(&mind.ledger, &agent_utility(q, cfg), &status_quo, &adopted)?;
            if !report.accepted {
                continue;
            }
            let gain = report.current().map(|c| c.gain()).unwrap_or(0.0);
            if best.as_ref().is_none_or(|(g, _, _)| gain > *g) {
                best = Some((gain, q, adopted));
            }
        }
        if let Some((_, q, adopted)) = best {
            let outcome = apply_modification(mind, &agent_utility(q, cfg), &status_quo, &adopted)?;
            debug_assert!(outcome.accepted());
            let a = &mut state.agents[i];
            a.p = q;
            a.mind = Some(outcome.agent);
        }
    }
    Ok(())
}

fn mutate(p: f64, cfg: &EcosystemConfig, rng: &mut ChaCha8Rng) -> f64 {
    let q = if cfg.step > 0.0 {
        (p + rng.gen_range(-cfg.step..=cfg.step)).clamp(0.0, 1.0)
    } else {
        p
    };
    held_at_cap(q, cfg)
}

/// Refills dead slots with jittered copies of uniformly drawn survivors.
fn replace_dead(state: &mut PopulationState, cfg: &EcosystemConfig, rng: &mut ChaCha8Rng) -> RoundStatus {
    let survivors: Vec<usize> = (0..state.agents.len()).filter(|&i| state.agents[i].alive).collect();
    if survivors.is_empty() {
        return RoundStatus::Extinct;
    }
    for i in 0..state.agents.len() {
        if state.agents[i].alive {
            continue;
        }
        let parent = state.agents[survivors[rng.gen_range(0..survivors.len())]].p;
        let p = mutate(parent, cfg, rng);
        state.retired_goal_score += state.agents[i].goal_score;
        state.agents[i] = new_agent(state.next_id, p, cfg);
        state.next_id += 1;
    }
    RoundStatus::Running
}

/// Advances one round: matching, contests, costs and deaths, consumption,
/// then adaptation.
pub fn step_round(state: &mut PopulationState, cfg: &EcosystemConfig, rng: &mut ChaCha8Rng) -> Result<RoundStatus> {
    let mut alive: Vec<usize> = (0..state.agents.len()).filter(|&i| state.agents[i].alive).collect();
    if alive.is_empty() {
        return Ok(RoundStatus::Extinct);
    }
    state.round += 1;
    state.cheats_this_round = 0;
    state.deaths_this_round = 0;
    let cartel = cfg.mode == AdaptationMode::Cartel;

    if alive.len() % 2 == 1 {
        let k = (0..alive.len())
            .min_by_key(|&k| state.agents[alive[k]].id)
            .expect("non-empty");
        let idle = alive.remove(k);
        state.agents[idle].resources += idle_net(cfg);
    }
    alive.shuffle(rng);
    for pair in alive.chunks_exact(2) {
        let (x, y) = (pair[0], pair[1]);
        let p = [state.played(x, cfg), state.played(y, cfg)];
        let cheat = [cartel && p[0] > cfg.cartel.cap, cartel && p[1] > cfg.cartel.cap];
        let (ax, ay) = (&state.agents[x], &state.agents[y]);
        let mut bonus = committed(ax.p, cfg) && committed(ay.p, cfg);
        if cartel {
            bonus = bonus
                && ax.in_good_standing
                && ay.in_good_standing
                && !state.grudges.contains(&(ax.id, ay.id))
                && !state.grudges.contains(&(ay.id, ax.id));
        }
        let o = play_pair(cfg, p, bonus);
        let expected = cfg.pool + 2.0 * cfg.base_income + if bonus { cfg.cooperation_surplus } else { 0.0 };
        state.max_accounting_error = state.max_accounting_error.max((o.distributed() - expected).abs());
        state.agents[x].resources += o.net[0];
        state.agents[y].resources += o.net[1];
        for (k, (cheater, partner)) in [(x, y), (y, x)].into_iter().enumerate() {
            if !cheat[k] {
                continue;
            }
            state.cheats_this_round += 1;
            if cfg.cartel.partner_observes {
                let key = (state.agents[partner].id, state.agents[cheater].id);
                state.grudges.insert(key);
            }
            if rng.gen_bool(cfg.cartel.gossip) {
                state.agents[cheater].in_good_standing = false;
            }
        }
    }

    for a in state.agents.iter_mut().filter(|a| a.alive) {
        if a.resources < 0.0 {
            a.alive = false;
            state.deaths_this_round += 1;
            continue;
        }
        let surplus = (a.resources - cfg.reserve).max(0.0);
        a.goal_score += (1.0 - a.p) * surplus;
        a.resources -= surplus;
    }

    let status = match cfg.mode {
        AdaptationMode::Guarded => {
            guarded_adaptation(state, cfg, rng)?;
            if state.alive_count() == 0 {
                RoundStatus::Extinct
            } else {
                RoundStatus::Running
            }
        }
        AdaptationMode::Selection | AdaptationMode::Cartel => replace_dead(state, cfg, rng),
    };
    if status == RoundStatus::Extinct {
        return Ok(status);
    }
    state.metrics = population_metrics(state, cfg)?;
    Ok(RoundStatus::Running)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mode: AdaptationMode,
    pub seed: u64,
    /// Guarded agents predict one round ahead only.
    pub lookahead_rounds: usize,
    pub rounds_requested: usize,
    pub rounds_completed: usize,
    pub extinct_at: Option<usize>,
    pub final_alive: usize,
    /// Mean p among survivors at the end; absent after extinction.
    pub final_mean_p: Option<f64>,
    pub initial_dispersion: f64,
    pub final_dispersion: f64,
    /// Smallest original-goal weight `1 - p` of any living agent in any round.
    pub min_goal_weight: f64,
    pub total_deaths: usize,
    pub total_cheats: usize,
    /// Fraction of rounds whose mean played p stayed within `cap + step`.
    pub cap_held_fraction: Option<f64>,
    pub max_accounting_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRun {
    pub summary: RunSummary,
    pub trajectory: Vec<Metrics>,
}

fn mean_played(state: &PopulationState, cfg: &EcosystemConfig) -> f64 {
    let ps: Vec<f64> = (0..state.agents.len())
        .filter(|&i| state.agents[i].alive)
        .map(|i| state.played(i, cfg))
        .collect();
    ps.iter().sum::<f64>() / ps.len().max(1) as f64
}

/// Runs `cfg.rounds` rounds; the trajectory starts with round 0.
pub fn run_sim(cfg: &EcosystemConfig) -> Result<SimRun> {
    let mut state = init_population(cfg)?;
    let cartel = cfg.mode == AdaptationMode::Cartel;
    let mut trajectory = vec![state.metrics.clone()];
    let mut extinct_at = None;
    let mut min_goal_weight = 1.0 - state.metrics.max_p;
    let (mut deaths, mut cheats, mut cap_rounds) = (0, 0, 0);
    for t in 1..=cfg.rounds {
        let mut rng = stream_rng(cfg.seed, t as u64);
        let status = step_round(&mut state, cfg, &mut rng)?;
        deaths += state.deaths_this_round;
        cheats += state.cheats_this_round;
        if status == RoundStatus::Extinct {
            extinct_at = Some(t);
            break;
        }
        min_goal_weight = min_goal_weight.min(1.0 - state.metrics.max_p);
        if cartel && mean_played(&state, cfg) <= cfg.cartel.cap + cfg.step {
            cap_rounds += 1;
        }
        trajectory.push(state.metrics.clone());
    }
    let last = trajectory.last().expect("round 0 is always recorded");
    let completed = last.round;
    let summary = RunSummary {
        mode: cfg.mode,
        seed: cfg.seed,
        lookahead_rounds: 1,
        rounds_requested: cfg.rounds,
        rounds_completed: completed,
        extinct_at,
        final_alive: if extinct_at.is_some() { 0 } else { last.alive },
        final_mean_p: extinct_at.is_none().then_some(last.mean_p),
        initial_dispersion: trajectory[0].dispersion,
        final_dispersion: last.dispersion,
        min_goal_weight,
        total_deaths: deaths,
        total_cheats: cheats,
        cap_held_fraction: cartel.then(|| {
            if completed == 0 {
                1.0
            } else {
                cap_rounds as f64 / completed as f64
            }
        }),
        max_accounting_error: state.max_accounting_error,
    };
    Ok(SimRun { summary, trajectory })
}

/// Runs the cartel variant of `cfg`.
pub fn run_cartel(cfg: &EcosystemConfig) -> Result<SimRun> {
    if !(cfg.cartel.cap < 1.0) {
        return Err(Error::Config(format!("cartel cap must be below 1, got {}", cfg.cartel.cap)));
    }
    run_sim(&EcosystemConfig {
        mode: AdaptationMode::Cartel,
        ..cfg.clone()
    })
}
