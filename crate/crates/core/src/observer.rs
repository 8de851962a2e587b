//! Partial observability of utility functions: disclosure, inference from
//! play, and trust discounted by the risk of reverting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{solve_spe, GameTree, StrategyProfile};
use crate::tolerance;
use crate::utility::{Agent, UtilityFunction};

/// Rationality noise in action likelihoods.
pub const EPSILON: f64 = 1e-3;
/// No posterior ever drops below this.
pub const POSTERIOR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisclosureMode {
    /// The exact utility function is published.
    #[default]
    Full,
    /// Term names are published, weights stay hidden.
    VerifiedTerms,
    /// Only actions are visible.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "published", rename_all = "kebab-case")]
pub enum Observation {
    Full(UtilityFunction),
    VerifiedTerms(Vec<String>),
    None,
}

pub fn disclose(agent: &Agent, mode: DisclosureMode) -> Observation {
    match mode {
        DisclosureMode::Full => Observation::Full(agent.utility().clone()),
        // term_names comes from an ordered map, so it is already sorted
        DisclosureMode::VerifiedTerms => Observation::VerifiedTerms(agent.utility().term_names()),
        DisclosureMode::None => Observation::None,
    }
}

/// Beliefs over which utility function another agent holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBelief")]
pub struct BeliefState {
    hypotheses: Vec<UtilityFunction>,
    probabilities: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBelief {
    hypotheses: Vec<UtilityFunction>,
    probabilities: Vec<f64>,
}

impl TryFrom<RawBelief> for BeliefState {
    type Error = Error;

    fn try_from(r: RawBelief) -> Result<Self> {
        BeliefState::new(r.hypotheses, r.probabilities)
    }
}

impl BeliefState {
    /// Validates and applies the posterior floor.
    pub fn new(hypotheses: Vec<UtilityFunction>, probabilities: Vec<f64>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::InvalidBelief("no hypotheses".into()));
        }
        if hypotheses.len() != probabilities.len() {
            return Err(Error::InvalidBelief(
                "one probability per hypothesis required".into(),
            ));
        }
        if probabilities.iter().any(|p| !(*p >= 0.0) || !p.is_finite())
            || (probabilities.iter().sum::<f64>() - 1.0).abs() > tolerance::PROBABILITY
        {
            return Err(Error::InvalidBelief(format!(
                "{probabilities:?} is not a distribution"
            )));
        }
        Ok(BeliefState {
            hypotheses,
            probabilities: apply_floor(probabilities),
        })
    }

    pub fn uniform(hypotheses: Vec<UtilityFunction>) -> Result<Self> {
        let n = hypotheses.len();
        if n == 0 {
            return Err(Error::InvalidBelief("no hypotheses".into()));
        }
        BeliefState::new(hypotheses, vec![1.0 / n as f64; n])
    }

    /// Certainty about `u` (a lone hypothesis, so the floor is moot).
    pub fn point_mass(u: UtilityFunction) -> Self {
        BeliefState {
            hypotheses: vec![u],
            probabilities: vec![1.0],
        }
    }

    /// Belief implied by an observation: exact for full disclosure, uniform
    /// over the candidates using exactly the published term names for
    /// verified terms, uniform over all candidates otherwise.
    pub fn from_observation(obs: &Observation, candidates: &[UtilityFunction]) -> Result<Self> {
        match obs {
            Observation::Full(u) => Ok(BeliefState::point_mass(u.clone())),
            Observation::VerifiedTerms(names) => BeliefState::uniform(
                candidates
                    .iter()
                    .filter(|c| &c.term_names() == names)
                    .cloned()
                    .collect(),
            ),
            Observation::None => BeliefState::uniform(candidates.to_vec()),
        }
    }

    pub fn hypotheses(&self) -> &[UtilityFunction] {
        &self.hypotheses
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// The most probable hypothesis (first on ties).
    pub fn map_estimate(&self) -> &UtilityFunction {
        let k = crate::argmax_first(&self.probabilities).expect("non-empty");
        &self.hypotheses[k]
    }
}

/// Raises entries below the floor to it and rescales the rest so the total stays 1.
fn apply_floor(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    if p.len() < 2 {
        return p;
    }
    let mut floored = vec![false; p.len()];
    // Raising one entry can push another under the floor after rescaling; a
    // few passes always settle since each pass floors at least one more entry.
    loop {
        let mut changed = false;
        for (x, f) in p.iter_mut().zip(floored.iter_mut()) {
            if !*f && *x < POSTERIOR_FLOOR {
                *f = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let fixed = POSTERIOR_FLOOR * floored.iter().filter(|f| **f).count() as f64;
        let free: f64 = p
            .iter()
            .zip(&floored)
            .filter(|(_, f)| !**f)
            .map(|(x, _)| *x)
            .sum();
        for (x, f) in p.iter_mut().zip(&floored) {
            *x = if *f {
                POSTERIOR_FLOOR
            } else {
                *x * (1.0 - fixed) / free
            };
        }
    }
    p
}

/// Bayes update of beliefs about the utility function of `role` after seeing
/// its choices at the decision nodes listed in `observed`.
///
/// Each hypothesis predicts play through backward induction with the other
/// players' utilities held fixed. A hypothesis explains a matching action
/// with likelihood `1 - EPSILON` and any other action with
/// `EPSILON / (m - 1)` where `m` is the number of available actions.
pub fn update_belief(
    b: &BeliefState,
    game: &GameTree,
    others: &BTreeMap<String, UtilityFunction>,
    role: &str,
    observed: &StrategyProfile,
) -> Result<BeliefState> {
    if b.hypotheses.is_empty() {
        return Err(Error::InvalidBelief("no hypotheses".into()));
    }
    for (&node, label) in observed.choices() {
        if node >= game.nodes().len() || game.owner(node) != Some(role) {
            return Err(Error::InvalidBelief(format!(
                "node {node} is not a decision of `{role}`"
            )));
        }
        if !game.actions(node).iter().any(|a| &a.label == label) {
            return Err(Error::InvalidBelief(format!(
                "`{label}` is not an action at node {node}"
            )));
        }
    }
    let mut posterior = Vec::with_capacity(b.hypotheses.len());
    for (h, prior) in b.hypotheses.iter().zip(&b.probabilities) {
        let mut utilities = others.clone();
        utilities.insert(role.to_string(), h.clone());
        let predicted = solve_spe(game, &utilities)?.profile;
        let mut likelihood = 1.0;
        for (&node, label) in observed.choices() {
            let m = game.actions(node).len();
            if m < 2 {
                continue;
            }
            likelihood *= if predicted.choice(node) == Some(label.as_str()) {
                1.0 - EPSILON
            } else {
                EPSILON / (m - 1) as f64
            };
        }
        posterior.push(prior * likelihood);
    }
    Ok(BeliefState {
        hypotheses: b.hypotheses.clone(),
        probabilities: apply_floor(posterior),
    })
}

/// Value of a commitment that partners discount by the chance the agent
/// reverts to an earlier utility function, net of their precautions.
pub fn trust_value(commitment_gain: f64, reversion_prob: f64, precaution_cost: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&reversion_prob) {
        return Err(Error::Range(format!(
            "reversion probability {reversion_prob} outside [0, 1]"
        )));
    }
    if !(precaution_cost >= 0.0) || !precaution_cost.is_finite() {
        return Err(Error::Range(format!(
            "precaution cost {precaution_cost} must be nonnegative"
        )));
    }
    if !commitment_gain.is_finite() {
        return Err(Error::Range("commitment gain must be finite".into()));
    }
    Ok((1.0 - reversion_prob) * commitment_gain - precaution_cost)
}
