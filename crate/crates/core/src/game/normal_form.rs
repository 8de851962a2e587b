use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// A two-player game with two strategies each. `payoffs[i][j]` is
/// `(row payoff, column payoff)` when row plays `i` and column plays `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalForm2x2 {
    pub row_labels: [String; 2],
    pub col_labels: [String; 2],
    pub payoffs: [[(f64, f64); 2]; 2],
}

impl NormalForm2x2 {
    /// Symmetric game from the row player's payoff matrix.
    pub fn symmetric(labels: [&str; 2], row: [[f64; 2]; 2]) -> Self {
        let labels = [labels[0].to_string(), labels[1].to_string()];
        let mut payoffs = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                payoffs[i][j] = (row[i][j], row[j][i]);
            }
        }
        NormalForm2x2 {
            row_labels: labels.clone(),
            col_labels: labels,
            payoffs,
        }
    }

    pub fn row(&self, i: usize, j: usize) -> f64 {
        self.payoffs[i][j].0
    }

    pub fn col(&self, i: usize, j: usize) -> f64 {
        self.payoffs[i][j].1
    }

    /// Expected `(row, column)` payoffs when row plays strategy 0 with
    /// probability `p` and column plays strategy 0 with probability `q`.
    pub fn expected(&self, p: f64, q: f64) -> (f64, f64) {
        let w = [[p * q, p * (1.0 - q)], [(1.0 - p) * q, (1.0 - p) * (1.0 - q)]];
        let mut out = (0.0, 0.0);
        for (i, wr) in w.iter().enumerate() {
            for (j, wij) in wr.iter().enumerate() {
                out.0 += wij * self.row(i, j);
                out.1 += wij * self.col(i, j);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Pure,
    Mixed,
}

/// A Nash equilibrium. `row_p` and `col_q` are the probabilities of
/// strategy 0 for each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium2x2 {
    pub kind: EquilibriumKind,
    pub row_p: f64,
    pub col_q: f64,
    pub row_value: f64,
    pub col_value: f64,
}

/// All pure equilibria (weak best responses, cell order) followed by the
/// fully mixed equilibrium when one exists strictly inside the unit square.
pub fn solve_2x2(g: &NormalForm2x2) -> Vec<Equilibrium2x2> {
    let mut out = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let row_ok = g.row(i, j) >= g.row(1 - i, j) - tolerance::TIE;
            let col_ok = g.col(i, j) >= g.col(i, 1 - j) - tolerance::TIE;
            if row_ok && col_ok {
                out.push(Equilibrium2x2 {
                    kind: EquilibriumKind::Pure,
                    row_p: if i == 0 { 1.0 } else { 0.0 },
                    col_q: if j == 0 { 1.0 } else { 0.0 },
                    row_value: g.row(i, j),
                    col_value: g.col(i, j),
                });
            }
        }
    }
    // Column's q makes row indifferent; row's p makes column indifferent.
    let dq = g.row(0, 0) - g.row(0, 1) - g.row(1, 0) + g.row(1, 1);
    let dp = g.col(0, 0) - g.col(1, 0) - g.col(0, 1) + g.col(1, 1);
    if dq.abs() > f64::EPSILON && dp.abs() > f64::EPSILON {
        let q = (g.row(1, 1) - g.row(0, 1)) / dq;
        let p = (g.col(1, 1) - g.col(1, 0)) / dp;
        let inside = |x: f64| x > tolerance::TIE && x < 1.0 - tolerance::TIE;
        if inside(p) && inside(q) {
            let (row_value, col_value) = g.expected(p, q);
            out.push(Equilibrium2x2 {
                kind: EquilibriumKind::Mixed,
                row_p: p,
                col_q: q,
                row_value,
                col_value,
            });
        }
    }
    out
}

/// One Euler step of two-strategy replicator dynamics for a symmetric game,
/// using row payoffs as fitness. `shares[0]` is the share playing strategy 0.
pub fn replicator_step(shares: [f64; 2], game: &NormalForm2x2, dt: f64) -> Result<[f64; 2]> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::Range(format!("dt = {dt} must lie in (0, 0.1]")));
    }
    if shares.iter().any(|s| !(*s >= 0.0))
        || (shares[0] + shares[1] - 1.0).abs() > tolerance::PROBABILITY
    {
        return Err(Error::InvalidState(format!(
            "shares {shares:?} are not a distribution"
        )));
    }
    let fitness = [
        game.row(0, 0) * shares[0] + game.row(0, 1) * shares[1],
        game.row(1, 0) * shares[0] + game.row(1, 1) * shares[1],
    ];
    let mean = shares[0] * fitness[0] + shares[1] * fitness[1];
    let mut next = [0.0; 2];
    for k in 0..2 {
        next[k] = (shares[k] + dt * shares[k] * (fitness[k] - mean)).max(0.0);
    }
    let total = next[0] + next[1];
    Ok([next[0] / total, next[1] / total])
}

/// Iterates [`replicator_step`] until the largest share change drops below
/// `tol` or `max_steps` is hit. Returns the final shares and steps taken.
pub fn replicator_run(
    start: [f64; 2],
    game: &NormalForm2x2,
    dt: f64,
    max_steps: usize,
    tol: f64,
) -> Result<([f64; 2], usize)> {
    let mut x = start;
    for step in 0..max_steps {
        let next = replicator_step(x, game, dt)?;
        let change = (next[0] - x[0]).abs();
        x = next;
        if change < tol {
            return Ok((x, step + 1));
        }
    }
    Ok((x, max_steps))
}
