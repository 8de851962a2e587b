use rand::Rng;
use serde::{Deserialize, Serialize};

use super::agent::weight_gap;
use super::config::EcosystemConfig;
use super::sim::{stream_rng, PopulationState, METRICS_STREAM};
use crate::error::{Error, Result};

/// One row of the per-round CSV stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub round: usize,
    pub alive: usize,
    pub mean_p: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub dispersion: f64,
    pub mean_resources: f64,
    pub total_goal_score: f64,
    pub cheats_this_round: usize,
}

/// Largest pairwise weight distance among `ps`: exact up to the configured
/// limit, otherwise the maximum over seeded random pairs.
pub fn dispersion(ps: &[f64], cfg: &EcosystemConfig, round: usize) -> f64 {
    let n = ps.len();
    let mut best = 0.0f64;
    if n <= cfg.dispersion_exact_limit {
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(weight_gap(ps[i], ps[j], cfg));
            }
        }
    } else {
        let mut rng = stream_rng(cfg.seed, METRICS_STREAM + round as u64);
        for _ in 0..cfg.dispersion_samples {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            best = best.max(weight_gap(ps[i], ps[j], cfg));
        }
    }
    best
}

pub fn population_metrics(state: &PopulationState, cfg: &EcosystemConfig) -> Result<Metrics> {
    let alive: Vec<_> = state.agents.iter().filter(|a| a.alive).collect();
    if alive.is_empty() {
        return Err(Error::Extinct(state.round));
    }
    let n = alive.len() as f64;
    let ps: Vec<f64> = alive.iter().map(|a| a.p).collect();
    Ok(Metrics {
        round: state.round,
        alive: alive.len(),
        mean_p: ps.iter().sum::<f64>() / n,
        min_p: ps.iter().copied().fold(f64::INFINITY, f64::min),
        max_p: ps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        dispersion: dispersion(&ps, cfg, state.round),
        mean_resources: alive.iter().map(|a| a.resources).sum::<f64>() / n,
        total_goal_score: state.retired_goal_score + state.agents.iter().map(|a| a.goal_score).sum::<f64>(),
        cheats_this_round: state.cheats_this_round,
    })
}
