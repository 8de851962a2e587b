//! All-pay survival contest: only the agents that mutilate themselves the
//! most survive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoldemortConfig {
    pub agents: usize,
    /// Fraction φ of agents that survive.
    pub survivor_fraction: f64,
    pub max_level: f64,
    /// Grid spacing of mutilation levels in `[0, max_level]`.
    pub level_step: f64,
    pub survival_value: f64,
    pub max_iterations: usize,
}

impl Default for VoldemortConfig {
    fn default() -> Self {
        VoldemortConfig {
            agents: 10,
            survivor_fraction: 0.7,
            max_level: 10.0,
            level_step: 1.0,
            survival_value: 1000.0,
            max_iterations: 1000,
        }
    }
}

impl VoldemortConfig {
    pub fn levels(&self) -> Result<Vec<f64>> {
        if !(self.level_step > 0.0) || !(self.max_level >= 0.0) || !self.max_level.is_finite() {
            return Err(Error::Config("mutilation grid is empty".into()));
        }
        let n = (self.max_level / self.level_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| k as f64 * self.level_step).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::Config("contest needs at least one agent".into()));
        }
        if !(self.survivor_fraction > 0.0 && self.survivor_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "survivor_fraction must lie in (0, 1], got {}",
                self.survivor_fraction
            )));
        }
        if !(self.survival_value >= 0.0) {
            return Err(Error::Config("survival_value must be nonnegative".into()));
        }
        self.levels().map(|_| ())
    }

    pub fn survivors(&self) -> usize {
        (self.survivor_fraction * self.agents as f64 + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoldemortOutcome {
    pub levels: Vec<f64>,
    pub survivors: Vec<bool>,
    pub converged: bool,
    pub iterations: usize,
    pub mean_level: f64,
}

/// Agents ranked by level, highest first, lower id first on ties; the top
/// `k` survive.
fn survival(levels: &[usize], k: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| levels[b].cmp(&levels[a]).then(a.cmp(&b)));
    let mut alive = vec![false; levels.len()];
    for &i in order.iter().take(k) {
        alive[i] = true;
    }
    alive
}

/// Iterated best response from all-zero levels. Agents move in id order, and
/// only on strict improvement, to the lowest level that is strictly better.
/// A survivor's payoff is `V - s`; the dead get nothing, whatever they spent.
pub fn voldemort_contest(cfg: &VoldemortConfig) -> Result<VoldemortOutcome> {
    cfg.validate()?;
    let grid = cfg.levels()?;
    let k = cfg.survivors();
    let n = cfg.agents;
    let mut levels = vec![0usize; n];
    let payoff = |levels: &[usize], i: usize| {
        if survival(levels, k)[i] {
            cfg.survival_value - grid[levels[i]]
        } else {
            0.0
        }
    };
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut changed = false;
        for i in 0..n {
            let current = payoff(&levels, i);
            let mut trial = levels.clone();
            let better = (0..grid.len()).find(|&s| {
                trial[i] = s;
                payoff(&trial, i) > current + crate::tolerance::TIE
            });
            if let Some(s) = better {
                levels[i] = s;
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    let values: Vec<f64> = levels.iter().map(|&s| grid[s]).collect();
    Ok(VoldemortOutcome {
        mean_level: values.iter().sum::<f64>() / n as f64,
        survivors: survival(&levels, k),
        levels: values,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scarce_survival_drives_levels_to_the_top() {
        let out = voldemort_contest(&VoldemortConfig::default()).unwrap();
        assert!(out.converged);
        assert!(out.mean_level >= 9.0, "{out:?}");
        assert_eq!(out.survivors.iter().filter(|s| **s).count(), 7);
    }

    #[test]
    fn everyone_survives_without_competition() {
        let cfg = VoldemortConfig {
            survivor_fraction: 1.0,
            ..Default::default()
        };
        let out = voldemort_contest(&cfg).unwrap();
        assert!(out.levels.iter().all(|s| *s == 0.0));
        assert!(out.converged);
    }

    #[test]
    fn worthless_survival_means_no_mutilation() {
        let cfg = VoldemortConfig {
            survival_value: 0.0,
            ..Default::default()
        };
        assert!(voldemort_contest(&cfg).unwrap().levels.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let cfg = VoldemortConfig {
            level_step: 0.0,
            ..Default::default()
        };
        assert!(matches!(voldemort_contest(&cfg), Err(Error::Config(_))));
    }
}
