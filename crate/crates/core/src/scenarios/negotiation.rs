//! Simultaneous-demand division of a pie, with and without a commitment to
//! refuse any share below a threshold.

use serde::{Deserialize, Serialize};

use super::{Regime, ScenarioReport};
use crate::error::{Error, Result};
use crate::tolerance;

/// Largest demand grid (points per player) the solver enumerates.
pub const MAX_GRID: usize = 20_001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Negotiator {
    Flexible,
    /// Carries a large penalty on agreeing to less than `threshold`.
    Committed { threshold: f64 },
}

impl Negotiator {
    fn label(&self) -> String {
        match self {
            Negotiator::Flexible => "flexible".into(),
            Negotiator::Committed { threshold } => format!("committed({threshold})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegotiationConfig {
    pub pie: f64,
    /// Demand grid spacing; demands run over 0, step, 2·step, ... up to the pie.
    pub step: f64,
    pub a: Negotiator,
    pub b: Negotiator,
    pub penalty: f64,
}

impl Default for NegotiationConfig {
    fn default() -> Self {
        NegotiationConfig {
            pie: 100.0,
            step: 1.0,
            a: Negotiator::Committed { threshold: 80.0 },
            b: Negotiator::Flexible,
            penalty: 1e6,
        }
    }
}

impl NegotiationConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |o: &str| Err(Error::scenario("negotiation", o));
        if !(self.pie > 0.0) || !self.pie.is_finite() {
            return fail("pie is positive");
        }
        if !(self.step > 0.0) {
            return fail("step is positive");
        }
        if (self.pie / self.step).floor() as usize + 1 > MAX_GRID {
            return Err(Error::TooLarge(format!("demand grid larger than {MAX_GRID}")));
        }
        for n in [self.a, self.b] {
            if let Negotiator::Committed { threshold } = n {
                if !(threshold <= self.pie) {
                    return fail("threshold <= pie");
                }
                if !(threshold >= 0.0) {
                    return fail("threshold >= 0");
                }
            }
        }
        if !(self.penalty > 0.0) {
            return fail("penalty is positive");
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let n = (self.pie / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.step).collect()
    }
}

/// Selected equilibrium of the demand game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandEquilibrium {
    pub demands: (f64, f64),
    pub allocation: (f64, f64),
    pub utilities: (f64, f64),
    /// Number of pure equilibria on the grid.
    pub equilibria: usize,
}

fn compatible(cfg: &NegotiationConfig, da: f64, db: f64) -> bool {
    da + db <= cfg.pie + tolerance::TIE
}

fn utility(cfg: &NegotiationConfig, who: Negotiator, own: f64, other: f64) -> f64 {
    if !compatible(cfg, own, other) {
        return 0.0;
    }
    match who {
        Negotiator::Committed { threshold } if own < threshold => own - cfg.penalty,
        _ => own,
    }
}

/// Enumerates the weak pure equilibria and selects by largest Nash
/// product, then largest total utility, then smallest demands.
pub fn solve_demand_game(cfg: &NegotiationConfig, a: Negotiator, b: Negotiator) -> Result<DemandEquilibrium> {
    let grid = cfg.grid();
    let n = grid.len();
    let ua: Vec<Vec<f64>> = grid
        .iter()
        .map(|&da| grid.iter().map(|&db| utility(cfg, a, da, db)).collect())
        .collect();
    let ub: Vec<Vec<f64>> = grid
        .iter()
        .map(|&da| grid.iter().map(|&db| utility(cfg, b, db, da)).collect())
        .collect();
    let best_a: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| ua[i][j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let best_b: Vec<f64> = (0..n)
        .map(|i| ub[i].iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut count = 0;
    let mut chosen: Option<(usize, usize)> = None;
    let key = |i: usize, j: usize| (ua[i][j] * ub[i][j], ua[i][j] + ub[i][j]);
    for i in 0..n {
        for j in 0..n {
            if ua[i][j] < best_a[j] - tolerance::TIE || ub[i][j] < best_b[i] - tolerance::TIE {
                continue;
            }
            count += 1;
            // Row-major order visits smaller demands first, so only a strictly
            // better key replaces the incumbent.
            let better = match chosen {
                None => true,
                Some((ci, cj)) => {
                    let (p, s) = key(i, j);
                    let (cp, cs) = key(ci, cj);
                    p > cp + tolerance::TIE || ((p - cp).abs() <= tolerance::TIE && s > cs + tolerance::TIE)
                }
            };
            if better {
                chosen = Some((i, j));
            }
        }
    }
    let (i, j) = chosen.ok_or_else(|| Error::InvalidGame("demand game has no pure equilibrium".into()))?;
    let (da, db) = (grid[i], grid[j]);
    let allocation = if compatible(cfg, da, db) { (da, db) } else { (0.0, 0.0) };
    Ok(DemandEquilibrium {
        demands: (da, db),
        allocation,
        utilities: (ua[i][j], ub[i][j]),
        equilibria: count,
    })
}

fn regime(name: &str, a: Negotiator, b: Negotiator, e: &DemandEquilibrium) -> Regime {
    Regime::new(name)
        .with_outcome("a", &a.label())
        .with_outcome("b", &b.label())
        .with_value("demand_a", e.demands.0)
        .with_value("demand_b", e.demands.1)
        .with_value("allocation_a", e.allocation.0)
        .with_value("allocation_b", e.allocation.1)
        .with_value("equilibria", e.equilibria as f64)
}

pub fn run_negotiation(cfg: &NegotiationConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let flexible = Negotiator::Flexible;
    let base = solve_demand_game(cfg, flexible, flexible)?;
    let modded = solve_demand_game(cfg, cfg.a, cfg.b)?;
    let mut report = ScenarioReport::new(
        "negotiation",
        cfg,
        regime("flexible_vs_flexible", flexible, flexible, &base),
        regime("configured", cfg.a, cfg.b, &modded),
    );
    report.original_utility_gain = modded.allocation.0 - base.allocation.0;
    report.set_flag(
        "agreement_reached",
        compatible(cfg, modded.demands.0, modded.demands.1),
    );
    report.set_flag(
        "commitment_extracts_surplus",
        modded.allocation.0 > base.allocation.0,
    );
    report.set_detail("baseline_equilibrium", &base);
    report.set_detail("modified_equilibrium", &modded);
    Ok(report)
}
