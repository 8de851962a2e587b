use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

pub const MAX_TYPES: usize = 4;
pub const MAX_MESSAGES: usize = 6;
pub const MAX_ACTIONS: usize = 6;

/// A sender message. `claims` names the type this message asserts, if any;
/// non-claims (such as staying silent) are always feasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claims: Option<String>,
}

impl Message {
    pub fn silent(label: &str) -> Self {
        Message {
            label: label.to_string(),
            claims: None,
        }
    }

    pub fn claim(label: &str, ty: &str) -> Self {
        Message {
            label: label.to_string(),
            claims: Some(ty.to_string()),
        }
    }
}

/// A two-stage sender-receiver game with a privately known sender type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignaling")]
pub struct SignalingGame {
    pub types: Vec<String>,
    pub priors: Vec<f64>,
    pub messages: Vec<Message>,
    pub actions: Vec<String>,
    /// `[type][message][action]`.
    pub sender_payoff: Vec<Vec<Vec<f64>>>,
    /// `[type][action]`.
    pub receiver_payoff: Vec<Vec<f64>>,
    /// When set, a claim is only feasible for the type it names.
    pub honest: bool,
}

#[derive(Deserialize)]
struct RawSignaling {
    types: Vec<String>,
    priors: Vec<f64>,
    messages: Vec<Message>,
    actions: Vec<String>,
    sender_payoff: Vec<Vec<Vec<f64>>>,
    receiver_payoff: Vec<Vec<f64>>,
    #[serde(default)]
    honest: bool,
}

impl TryFrom<RawSignaling> for SignalingGame {
    type Error = Error;

    fn try_from(r: RawSignaling) -> Result<Self> {
        let g = SignalingGame {
            types: r.types,
            priors: r.priors,
            messages: r.messages,
            actions: r.actions,
            sender_payoff: r.sender_payoff,
            receiver_payoff: r.receiver_payoff,
            honest: r.honest,
        };
        g.validate()?;
        Ok(g)
    }
}

impl SignalingGame {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGame(m));
        let (nt, nm, na) = (self.types.len(), self.messages.len(), self.actions.len());
        if nt == 0 || nm == 0 || na == 0 {
            return bad("types, messages and actions must be non-empty".into());
        }
        if nt > MAX_TYPES || nm > MAX_MESSAGES || na > MAX_ACTIONS {
            return Err(Error::TooLarge(format!(
                "{nt} types, {nm} messages, {na} actions (limits {MAX_TYPES}/{MAX_MESSAGES}/{MAX_ACTIONS})"
            )));
        }
        if self.priors.len() != nt {
            return bad("one prior per type required".into());
        }
        if self.priors.iter().any(|p| !(*p >= 0.0) || !p.is_finite())
            || (self.priors.iter().sum::<f64>() - 1.0).abs() > tolerance::PROBABILITY
        {
            return bad(format!("priors {:?} are not a distribution", self.priors));
        }
        for m in &self.messages {
            if let Some(t) = &m.claims {
                if !self.types.contains(t) {
                    return bad(format!("message `{}` claims unknown type `{t}`", m.label));
                }
            }
        }
        let shape_ok = self.sender_payoff.len() == nt
            && self
                .sender_payoff
                .iter()
                .all(|by_m| by_m.len() == nm && by_m.iter().all(|a| a.len() == na))
            && self.receiver_payoff.len() == nt
            && self.receiver_payoff.iter().all(|a| a.len() == na);
        if !shape_ok {
            return bad("payoff tables do not cover types × messages × actions".into());
        }
        let finite = self
            .sender_payoff
            .iter()
            .flatten()
            .flatten()
            .chain(self.receiver_payoff.iter().flatten())
            .all(|x| x.is_finite());
        if !finite {
            return bad("payoff tables contain non-finite entries".into());
        }
        Ok(())
    }

    /// Whether type `t` may send message `m`.
    pub fn feasible(&self, t: usize, m: usize) -> bool {
        match &self.messages[m].claims {
            Some(claimed) if self.honest => *claimed == self.types[t],
            _ => true,
        }
    }

    fn receiver_expected(&self, belief: &[f64], action: usize) -> f64 {
        belief
            .iter()
            .enumerate()
            .map(|(t, b)| b * self.receiver_payoff[t][action])
            .sum()
    }

    /// Actions within tolerance of the best expected receiver payoff.
    pub fn best_responses(&self, belief: &[f64]) -> Vec<usize> {
        let values: Vec<f64> = (0..self.actions.len())
            .map(|a| self.receiver_expected(belief, a))
            .collect();
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..values.len())
            .filter(|&a| values[a] >= best - tolerance::TIE)
            .collect()
    }
}

/// A pure perfect Bayesian equilibrium, by index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pbe {
    /// Message sent by each type.
    pub sender: Vec<usize>,
    /// Action taken after each message.
    pub receiver: Vec<usize>,
    /// Receiver belief over types after each message.
    pub beliefs: Vec<Vec<f64>>,
    /// Whether each message is sent with positive probability.
    pub on_path: Vec<bool>,
    pub sender_value: f64,
    pub receiver_value: f64,
}

/// The same equilibrium keyed by labels, for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PbeReport {
    pub sender: BTreeMap<String, String>,
    pub receiver: BTreeMap<String, String>,
    pub beliefs: BTreeMap<String, BTreeMap<String, f64>>,
    pub on_path: BTreeMap<String, bool>,
    pub sender_value: f64,
    pub receiver_value: f64,
}

impl Pbe {
    pub fn labelled(&self, g: &SignalingGame) -> PbeReport {
        let msg = |m: usize| g.messages[m].label.clone();
        PbeReport {
            sender: (0..g.types.len())
                .map(|t| (g.types[t].clone(), msg(self.sender[t])))
                .collect(),
            receiver: (0..g.messages.len())
                .map(|m| (msg(m), g.actions[self.receiver[m]].clone()))
                .collect(),
            beliefs: (0..g.messages.len())
                .map(|m| {
                    (
                        msg(m),
                        g.types
                            .iter()
                            .cloned()
                            .zip(self.beliefs[m].iter().copied())
                            .collect(),
                    )
                })
                .collect(),
            on_path: (0..g.messages.len())
                .map(|m| (msg(m), self.on_path[m]))
                .collect(),
            sender_value: self.sender_value,
            receiver_value: self.receiver_value,
        }
    }

    /// Message sent by the named type.
    pub fn message_of<'a>(&self, g: &'a SignalingGame, ty: &str) -> Option<&'a str> {
        let t = g.types.iter().position(|x| x == ty)?;
        Some(g.messages[self.sender[t]].label.as_str())
    }

    /// Action the named type ends up facing.
    pub fn action_for<'a>(&self, g: &'a SignalingGame, ty: &str) -> Option<&'a str> {
        let t = g.types.iter().position(|x| x == ty)?;
        Some(g.actions[self.receiver[self.sender[t]]].as_str())
    }
}

/// Odometer over mixed-radix digits; returns false after the last vector.
fn advance(digits: &mut [usize], radix: &[usize]) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix[k] {
            return true;
        }
        digits[k] = 0;
    }
    false
}

/// Off-path belief candidates for message `m`: the prior restricted to the
/// types that can send `m`, then each of those types as a point mass.
fn off_path_candidates(g: &SignalingGame, m: usize) -> Vec<Vec<f64>> {
    let nt = g.types.len();
    let support: Vec<usize> = (0..nt).filter(|&t| g.feasible(t, m)).collect();
    if support.is_empty() {
        return vec![g.priors.clone()];
    }
    let mass: f64 = support.iter().map(|&t| g.priors[t]).sum();
    let mut restricted = vec![0.0; nt];
    for &t in &support {
        restricted[t] = if mass > 0.0 {
            g.priors[t] / mass
        } else {
            1.0 / support.len() as f64
        };
    }
    let mut out = vec![restricted];
    for &t in &support {
        let mut point = vec![0.0; nt];
        point[t] = 1.0;
        if !out.contains(&point) {
            out.push(point);
        }
    }
    out
}

/// Every pure PBE found by enumerating sender strategies, off-path beliefs
/// and receiver best responses. Sorted by sender ex-ante value, highest
/// first; ties keep the lexicographic order of sender strategies.
pub fn solve_signaling(g: &SignalingGame) -> Result<Vec<Pbe>> {
    g.validate()?;
    let (nt, nm) = (g.types.len(), g.messages.len());
    let feasible: Vec<Vec<usize>> = (0..nt)
        .map(|t| (0..nm).filter(|&m| g.feasible(t, m)).collect())
        .collect();
    if let Some(t) = feasible.iter().position(Vec::is_empty) {
        return Err(Error::InfeasibleGame(format!(
            "type `{}` has no feasible message",
            g.types[t]
        )));
    }
    let radix: Vec<usize> = feasible.iter().map(Vec::len).collect();
    let mut found: Vec<Pbe> = Vec::new();
    let mut seen: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    let mut digits = vec![0usize; nt];
    loop {
        let sender: Vec<usize> = (0..nt).map(|t| feasible[t][digits[t]]).collect();
        let mut mass = vec![0.0; nm];
        for t in 0..nt {
            mass[sender[t]] += g.priors[t];
        }
        let on_path: Vec<bool> = mass.iter().map(|&x| x > 0.0).collect();
        let mut candidates: Vec<Vec<Vec<f64>>> = Vec::with_capacity(nm);
        for m in 0..nm {
            if on_path[m] {
                let bayes = (0..nt)
                    .map(|t| {
                        if sender[t] == m {
                            g.priors[t] / mass[m]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                candidates.push(vec![bayes]);
            } else {
                candidates.push(off_path_candidates(g, m));
            }
        }
        let belief_radix: Vec<usize> = candidates.iter().map(Vec::len).collect();
        let mut belief_digits = vec![0usize; nm];
        loop {
            let beliefs: Vec<Vec<f64>> = (0..nm)
                .map(|m| candidates[m][belief_digits[m]].clone())
                .collect();
            let responses: Vec<Vec<usize>> =
                beliefs.iter().map(|b| g.best_responses(b)).collect();
            let response_radix: Vec<usize> = responses.iter().map(Vec::len).collect();
            let mut response_digits = vec![0usize; nm];
            loop {
                let receiver: Vec<usize> =
                    (0..nm).map(|m| responses[m][response_digits[m]]).collect();
                if sender_best_responds(g, &feasible, &sender, &receiver)
                    && seen.insert((sender.clone(), receiver.clone()))
                {
                    let sender_value = (0..nt)
                        .map(|t| g.priors[t] * g.sender_payoff[t][sender[t]][receiver[sender[t]]])
                        .sum();
                    let receiver_value = (0..nt)
                        .map(|t| g.priors[t] * g.receiver_payoff[t][receiver[sender[t]]])
                        .sum();
                    found.push(Pbe {
                        sender: sender.clone(),
                        receiver,
                        beliefs: beliefs.clone(),
                        on_path: on_path.clone(),
                        sender_value,
                        receiver_value,
                    });
                }
                if !advance(&mut response_digits, &response_radix) {
                    break;
                }
            }
            if !advance(&mut belief_digits, &belief_radix) {
                break;
            }
        }
        if !advance(&mut digits, &radix) {
            break;
        }
    }
    found.sort_by(|a, b| b.sender_value.total_cmp(&a.sender_value));
    Ok(found)
}

fn sender_best_responds(
    g: &SignalingGame,
    feasible: &[Vec<usize>],
    sender: &[usize],
    receiver: &[usize],
) -> bool {
    (0..g.types.len()).all(|t| {
        let own = g.sender_payoff[t][sender[t]][receiver[sender[t]]];
        feasible[t]
            .iter()
            .all(|&m| g.sender_payoff[t][m][receiver[m]] <= own + tolerance::TIE)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_type() -> SignalingGame {
        SignalingGame {
            types: vec!["only".into()],
            priors: vec![1.0],
            messages: vec![Message::silent("quiet"), Message::silent("loud")],
            actions: vec!["x".into(), "y".into()],
            sender_payoff: vec![vec![vec![0.0, 1.0], vec![0.0, 1.0]]],
            receiver_payoff: vec![vec![0.0, 3.0]],
            honest: true,
        }
    }

    #[test]
    fn single_type_receiver_best_responds() {
        let eqs = solve_signaling(&one_type()).unwrap();
        assert!(!eqs.is_empty());
        for e in &eqs {
            assert!(e.receiver.iter().all(|&a| a == 1));
            assert!(e.beliefs.iter().all(|b| b == &vec![1.0]));
        }
    }

    #[test]
    fn honesty_without_silent_can_be_infeasible() {
        let mut g = one_type();
        g.types.push("other".into());
        g.priors = vec![0.5, 0.5];
        g.messages = vec![Message::claim("i am only", "only")];
        g.sender_payoff = vec![vec![vec![0.0, 1.0]]; 2];
        g.receiver_payoff = vec![vec![0.0, 3.0]; 2];
        assert!(matches!(solve_signaling(&g), Err(Error::InfeasibleGame(_))));
        g.honest = false;
        assert!(solve_signaling(&g).is_ok());
    }

    #[test]
    fn bounds_and_shapes_are_checked() {
        let mut g = one_type();
        g.actions = (0..7).map(|i| i.to_string()).collect();
        assert!(matches!(solve_signaling(&g), Err(Error::TooLarge(_))));
        let mut g = one_type();
        g.receiver_payoff = vec![vec![0.0]];
        assert!(matches!(solve_signaling(&g), Err(Error::InvalidGame(_))));
        let mut g = one_type();
        g.priors = vec![0.7];
        assert!(solve_signaling(&g).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = one_type();
        let json = serde_json::to_string(&g).unwrap();
        let back: SignalingGame = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
