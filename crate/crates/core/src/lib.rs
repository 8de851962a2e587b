//! Solvers and simulations for agents that rewrite their own utility
//! functions to change how other agents treat them.
//!
//! The crate is organised bottom-up:
//!
//! * [`utility`]: weighted-feature utility functions, lotteries, and the
//!   modification ledger whose guard decides when a rewrite is accepted.
//! * [`game`]: exact solvers for extensive-form trees, 2x2 normal-form games,
//!   two-type signaling games and replicator dynamics.
//! * [`observer`]: disclosure modes, Bayesian inference of utility functions
//!   from actions, and trust discounting for reversion risk.
//! * [`scenarios`]: one parameterized, validated scenario per named game.
//! * [`ecosystem`]: the agent-based population model, the cartel variant and
//!   the all-pay mutilation contest.
//! * [`output`]: deterministic JSON and CSV emission.

// Negated comparisons are how validation rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ecosystem;
pub mod error;
pub mod game;
pub mod observer;
pub mod output;
pub mod scenarios;
pub mod utility;

pub use error::{Error, Result};

/// Numerical tolerances shared across modules.
pub mod tolerance {
    /// Probabilities must sum to one within this bound.
    pub const PROBABILITY: f64 = 1e-9;
    /// A normalized utility function has absolute weights summing to one within this bound.
    pub const NORMALIZATION: f64 = 1e-9;
    /// Strict improvement margin required under the current utility function.
    pub const GUARD_STRICT: f64 = 1e-9;
    /// Slack allowed under earlier utility functions in a full-chain guard.
    pub const GUARD_SLACK: f64 = 1e-9;
    /// Values closer than this are treated as ties and resolved by index order.
    pub const TIE: f64 = 1e-9;
}

/// Index of the first maximal value, treating values within [`tolerance::TIE`]
/// of the maximum as ties.
pub(crate) fn argmax_first(values: &[f64]) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|v| *v >= max - tolerance::TIE)
}
