//! Utility functions as finite weighted sums over named world features.
//!
//! Commitments are indicator features carrying negative weight. A
//! [`ModificationLedger`] records every utility function an agent has held and
//! the guard that vetted each transition.

mod features;
mod function;
mod ledger;

pub use features::{Branch, FeatureVector, Lottery};
pub use function::{best_outcome, weight_distance, UtilityFunction};
pub use ledger::{
    apply_modification, guard_check, Agent, AuditRecord, ComparisonRole, GuardComparison,
    GuardMode, GuardReport, ModificationLedger, ModificationOutcome,
};

/// Weighted sum of `features` under `u`. Features absent from the vector read as 0.
pub fn evaluate(u: &UtilityFunction, features: &FeatureVector) -> f64 {
    u.evaluate(features)
}

/// Probability-weighted average of [`evaluate`] over the lottery's branches.
pub fn expected_utility(u: &UtilityFunction, lottery: &Lottery) -> f64 {
    u.expected(lottery)
}
