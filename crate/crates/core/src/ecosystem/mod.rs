//! Agent-based model of many agents competing for scarce resources, where the
//! share of utility weight on influence decides contests.

mod agent;
mod config;
mod metrics;
mod sim;
mod voldemort;

pub use agent::{
    agent_utility, committed, idle_net, play_pair, tullock_share, weight_gap, weights, EcoAgent, PairOutcome,
    COOPERATION, GOAL, INFLUENCE,
};
pub use config::{AdaptationMode, CartelConfig, EcosystemConfig};
pub use metrics::{dispersion, population_metrics, Metrics};
pub use sim::{
    init_population, lookahead, run_cartel, run_sim, step_round, stream_rng, PopulationState, RoundStatus,
    RunSummary, SimRun, INIT_STREAM, METRICS_STREAM,
};
pub use voldemort::{voldemort_contest, VoldemortConfig, VoldemortOutcome};

use rayon::prelude::*;

use crate::error::Result;
use crate::game::NormalForm2x2;

/// Runs `cfg` once per seed, in parallel; results keep the order of `seeds`.
pub fn run_seeds(cfg: &EcosystemConfig, seeds: &[u64]) -> Result<Vec<SimRun>> {
    seeds
        .par_iter()
        .map(|&seed| run_sim(&EcosystemConfig { seed, ..cfg.clone() }))
        .collect()
}

/// The 2x2 game between an aggressive agent (weight `high`) and a passive
/// one (weight `low`), with each cell the row agent's net resource change.
pub fn induced_game(cfg: &EcosystemConfig, high: f64, low: f64) -> NormalForm2x2 {
    let ps = [high, low];
    let mut payoffs = [[(0.0, 0.0); 2]; 2];
    for (i, row) in payoffs.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let bonus = committed(ps[i], cfg) && committed(ps[j], cfg);
            let o = play_pair(cfg, [ps[i], ps[j]], bonus);
            *cell = (o.net[0], o.net[1]);
        }
    }
    NormalForm2x2 {
        row_labels: ["Aggressive".into(), "Passive".into()],
        col_labels: ["Aggressive".into(), "Passive".into()],
        payoffs,
    }
}

/// Share of aggressive agents implied by a mean p over a two-valued population.
pub fn aggressive_share(mean_p: f64, high: f64, low: f64) -> f64 {
    (mean_p - low) / (high - low)
}
