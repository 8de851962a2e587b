use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::argmax_first;
use crate::error::{Error, Result};
use crate::tolerance;
use crate::utility::{FeatureVector, Lottery, UtilityFunction};

pub type NodeId = usize;

/// Largest number of decision nodes [`brute_force_spe`] will enumerate.
pub const BRUTE_FORCE_MAX_DECISIONS: usize = 20;
/// Largest number of pure profiles [`brute_force_spe`] will enumerate.
pub const BRUTE_FORCE_MAX_PROFILES: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub label: String,
    pub child: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceBranch {
    pub probability: f64,
    pub child: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Decision {
        player: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        actions: Vec<Action>,
    },
    Chance {
        branches: Vec<ChanceBranch>,
    },
    /// Leaves carry world features per player role, never payoffs.
    Terminal {
        outcomes: BTreeMap<String, FeatureVector>,
    },
}

/// An extensive-form game with perfect information and chance moves.
///
/// Payoffs are induced by evaluating each player's utility function on the
/// feature vector it receives at a leaf, so rewriting a utility function only
/// requires re-solving the same tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTree")]
pub struct GameTree {
    players: Vec<String>,
    nodes: Vec<Node>,
    root: NodeId,
    #[serde(skip)]
    postorder: Vec<NodeId>,
}

#[derive(Deserialize)]
struct RawTree {
    players: Vec<String>,
    nodes: Vec<Node>,
    root: NodeId,
}

impl TryFrom<RawTree> for GameTree {
    type Error = Error;

    fn try_from(raw: RawTree) -> Result<Self> {
        GameTree::new(raw.players, raw.nodes, raw.root)
    }
}

impl GameTree {
    pub fn new(players: Vec<String>, nodes: Vec<Node>, root: NodeId) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidGame(m));
        if players.is_empty() {
            return invalid("no players".into());
        }
        let unique: BTreeSet<&String> = players.iter().collect();
        if unique.len() != players.len() {
            return invalid("duplicate player names".into());
        }
        let n = nodes.len();
        if root >= n {
            return invalid(format!("root {root} does not exist"));
        }
        let mut parents = vec![0usize; n];
        for (id, node) in nodes.iter().enumerate() {
            let children: Vec<NodeId> = match node {
                Node::Decision {
                    player, actions, ..
                } => {
                    if !unique.contains(player) {
                        return invalid(format!("node {id} owned by unknown player `{player}`"));
                    }
                    if actions.is_empty() {
                        return invalid(format!("decision node {id} has no actions"));
                    }
                    let labels: BTreeSet<&String> = actions.iter().map(|a| &a.label).collect();
                    if labels.len() != actions.len() {
                        return invalid(format!("decision node {id} repeats an action label"));
                    }
                    actions.iter().map(|a| a.child).collect()
                }
                Node::Chance { branches } => {
                    if branches.is_empty() {
                        return invalid(format!("chance node {id} has no branches"));
                    }
                    let mut total = 0.0;
                    for b in branches {
                        if !(b.probability >= 0.0) || !b.probability.is_finite() {
                            return invalid(format!("chance node {id} has a negative probability"));
                        }
                        total += b.probability;
                    }
                    if (total - 1.0).abs() > tolerance::PROBABILITY {
                        return invalid(format!("chance node {id} probabilities sum to {total}"));
                    }
                    branches.iter().map(|b| b.child).collect()
                }
                Node::Terminal { outcomes } => {
                    if let Some(p) = players.iter().find(|p| !outcomes.contains_key(*p)) {
                        return invalid(format!("terminal {id} has no features for `{p}`"));
                    }
                    Vec::new()
                }
            };
            for c in children {
                if c >= n {
                    return invalid(format!("node {id} has dangling child {c}"));
                }
                parents[c] += 1;
            }
        }
        if parents[root] != 0 {
            return invalid("root has a parent (cycle through root)".into());
        }
        if let Some(id) = (0..n).find(|&i| i != root && parents[i] > 1) {
            return invalid(format!("node {id} has several parents"));
        }
        // With in-degree at most one, full reachability from the root rules out cycles.
        let mut postorder = Vec::with_capacity(n);
        let mut visited = vec![false; n];
        let mut stack = vec![(root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                postorder.push(id);
                continue;
            }
            if visited[id] {
                return invalid(format!("node {id} is reached twice"));
            }
            visited[id] = true;
            stack.push((id, true));
            for c in children_of(&nodes[id]).into_iter().rev() {
                stack.push((c, false));
            }
        }
        if let Some(id) = visited.iter().position(|v| !v) {
            return invalid(format!("node {id} is unreachable from the root (cycle or orphan)"));
        }
        Ok(GameTree {
            players,
            nodes,
            root,
            postorder,
        })
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Decision nodes in id order.
    pub fn decision_nodes(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&i| matches!(self.nodes[i], Node::Decision { .. }))
            .collect()
    }

    /// Decision node whose `name` matches.
    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(
            |n| matches!(n, Node::Decision { name: Some(x), .. } if x == name),
        )
    }

    pub fn actions(&self, id: NodeId) -> &[Action] {
        match &self.nodes[id] {
            Node::Decision { actions, .. } => actions,
            _ => &[],
        }
    }

    pub fn owner(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id] {
            Node::Decision { player, .. } => Some(player),
            _ => None,
        }
    }

    fn player_index(&self, name: &str) -> usize {
        self.players
            .iter()
            .position(|p| p == name)
            .expect("validated player")
    }

    /// Per-player utility functions in player order.
    fn utilities_in_order<'a>(
        &self,
        utilities: &'a BTreeMap<String, UtilityFunction>,
    ) -> Result<Vec<&'a UtilityFunction>> {
        self.players
            .iter()
            .map(|p| {
                utilities
                    .get(p)
                    .ok_or_else(|| Error::InvalidGame(format!("no utility function for `{p}`")))
            })
            .collect()
    }

    /// Terminal payoffs induced by `utilities`, indexed `[node][player]`
    /// (zero for non-terminals).
    fn leaf_values(&self, utilities: &[&UtilityFunction]) -> Vec<Vec<f64>> {
        self.nodes
            .iter()
            .map(|node| match node {
                Node::Terminal { outcomes } => self
                    .players
                    .iter()
                    .zip(utilities)
                    .map(|(p, u)| u.evaluate(&outcomes[p]))
                    .collect(),
                _ => vec![0.0; self.players.len()],
            })
            .collect()
    }
}

fn children_of(node: &Node) -> Vec<NodeId> {
    match node {
        Node::Decision { actions, .. } => actions.iter().map(|a| a.child).collect(),
        Node::Chance { branches } => branches.iter().map(|b| b.child).collect(),
        Node::Terminal { .. } => Vec::new(),
    }
}

/// Incremental builder; children must be added before their parents.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    players: Vec<String>,
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new(players: &[&str]) -> Self {
        TreeBuilder {
            players: players.iter().map(|p| p.to_string()).collect(),
            nodes: Vec::new(),
        }
    }

    pub fn terminal(&mut self, outcomes: &[(&str, FeatureVector)]) -> NodeId {
        self.nodes.push(Node::Terminal {
            outcomes: outcomes
                .iter()
                .map(|(p, f)| (p.to_string(), f.clone()))
                .collect(),
        });
        self.nodes.len() - 1
    }

    pub fn decision(&mut self, player: &str, name: &str, actions: &[(&str, NodeId)]) -> NodeId {
        self.nodes.push(Node::Decision {
            player: player.to_string(),
            name: Some(name.to_string()),
            actions: actions
                .iter()
                .map(|(label, child)| Action {
                    label: label.to_string(),
                    child: *child,
                })
                .collect(),
        });
        self.nodes.len() - 1
    }

    pub fn chance(&mut self, branches: &[(f64, NodeId)]) -> NodeId {
        self.nodes.push(Node::Chance {
            branches: branches
                .iter()
                .map(|(probability, child)| ChanceBranch {
                    probability: *probability,
                    child: *child,
                })
                .collect(),
        });
        self.nodes.len() - 1
    }

    pub fn build(self, root: NodeId) -> Result<GameTree> {
        GameTree::new(self.players, self.nodes, root)
    }
}

/// Pure strategy: the action chosen at every decision node.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StrategyProfile {
    choices: BTreeMap<NodeId, String>,
}

impl StrategyProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: NodeId, action: &str) -> Self {
        self.choices.insert(node, action.to_string());
        self
    }

    pub fn choice(&self, node: NodeId) -> Option<&str> {
        self.choices.get(&node).map(String::as_str)
    }

    pub fn choices(&self) -> &BTreeMap<NodeId, String> {
        &self.choices
    }

    /// The sub-profile for nodes owned by `player`.
    pub fn restricted_to(&self, game: &GameTree, player: &str) -> StrategyProfile {
        StrategyProfile {
            choices: self
                .choices
                .iter()
                .filter(|(n, _)| game.owner(**n) == Some(player))
                .map(|(n, a)| (*n, a.clone()))
                .collect(),
        }
    }

    fn action_index(&self, game: &GameTree, node: NodeId) -> Result<usize> {
        let label = self
            .choice(node)
            .ok_or_else(|| Error::InvalidGame(format!("profile has no choice at node {node}")))?;
        game.actions(node)
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| Error::InvalidGame(format!("`{label}` is not an action at node {node}")))
    }
}

/// Equilibrium profile plus what it induces for every player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeSolution {
    pub profile: StrategyProfile,
    /// Outcome lottery per player, over that player's terminal features.
    pub lotteries: BTreeMap<String, Lottery>,
    /// Expected utility per player under the solving utility functions.
    pub values: BTreeMap<String, f64>,
    /// Probability of reaching each node under the profile.
    #[serde(skip)]
    pub reach: Vec<f64>,
}

impl SpeSolution {
    /// Action chosen at the decision node named `name`.
    pub fn choice_at<'a>(&'a self, game: &GameTree, name: &str) -> Option<&'a str> {
        game.find(name).and_then(|id| self.profile.choice(id))
    }

    /// Whether the named decision node is reached with positive probability.
    pub fn reaches(&self, game: &GameTree, name: &str) -> bool {
        game.find(name).map(|id| self.reach[id] > 0.0).unwrap_or(false)
    }

    pub fn value(&self, player: &str) -> f64 {
        self.values.get(player).copied().unwrap_or(f64::NAN)
    }
}

/// Reach probabilities, lotteries and values induced by a complete profile.
pub fn induced_outcome(
    game: &GameTree,
    utilities: &BTreeMap<String, UtilityFunction>,
    profile: &StrategyProfile,
) -> Result<SpeSolution> {
    let us = game.utilities_in_order(utilities)?;
    let mut reach = vec![0.0; game.nodes.len()];
    reach[game.root] = 1.0;
    // Reverse postorder visits parents before children.
    for &id in game.postorder.iter().rev() {
        let here = reach[id];
        match &game.nodes[id] {
            Node::Decision { actions, .. } => {
                let k = profile.action_index(game, id)?;
                reach[actions[k].child] += here;
            }
            Node::Chance { branches } => {
                for b in branches {
                    reach[b.child] += here * b.probability;
                }
            }
            Node::Terminal { .. } => {}
        }
    }
    let mut lotteries = BTreeMap::new();
    let mut values = BTreeMap::new();
    for (player, u) in game.players.iter().zip(&us) {
        let branches: Vec<(f64, FeatureVector)> = game
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(id, node)| match node {
                Node::Terminal { outcomes } if reach[id] > 0.0 => {
                    Some((reach[id], outcomes[player].clone()))
                }
                _ => None,
            })
            .collect();
        let lottery = Lottery::new(branches)?;
        values.insert(player.clone(), u.expected(&lottery));
        lotteries.insert(player.clone(), lottery);
    }
    Ok(SpeSolution {
        profile: profile.clone(),
        lotteries,
        values,
        reach,
    })
}

/// Subgame-perfect equilibrium by backward induction.
///
/// At each decision node the owner picks the action with the highest induced
/// expected utility; ties go to the lowest action index.
pub fn solve_spe(
    game: &GameTree,
    utilities: &BTreeMap<String, UtilityFunction>,
) -> Result<SpeSolution> {
    let us = game.utilities_in_order(utilities)?;
    let mut values = game.leaf_values(&us);
    let mut profile = StrategyProfile::new();
    for &id in &game.postorder {
        match &game.nodes[id] {
            Node::Decision { player, actions, .. } => {
                let owner = game.player_index(player);
                let options: Vec<f64> = actions.iter().map(|a| values[a.child][owner]).collect();
                let best = argmax_first(&options).expect("decision nodes have actions");
                values[id] = values[actions[best].child].clone();
                profile.choices.insert(id, actions[best].label.clone());
            }
            Node::Chance { branches } => {
                let mut v = vec![0.0; game.players.len()];
                for b in branches {
                    for (acc, x) in v.iter_mut().zip(&values[b.child]) {
                        *acc += b.probability * x;
                    }
                }
                values[id] = v;
            }
            Node::Terminal { .. } => {}
        }
    }
    induced_outcome(game, utilities, &profile)
}

/// Independent oracle: enumerates every pure profile and keeps the one where
/// each decision node picks the tie-broken best action given the profile's
/// own continuation play.
pub fn brute_force_spe(
    game: &GameTree,
    utilities: &BTreeMap<String, UtilityFunction>,
) -> Result<SpeSolution> {
    let decisions = game.decision_nodes();
    if decisions.len() > BRUTE_FORCE_MAX_DECISIONS {
        return Err(Error::TooLarge(format!(
            "{} decision nodes (limit {BRUTE_FORCE_MAX_DECISIONS})",
            decisions.len()
        )));
    }
    let radix: Vec<usize> = decisions.iter().map(|&d| game.actions(d).len()).collect();
    let total = radix
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(r as u64))
        .filter(|&t| t <= BRUTE_FORCE_MAX_PROFILES)
        .ok_or_else(|| Error::TooLarge("too many pure profiles".into()))?;
    let us = game.utilities_in_order(utilities)?;
    let leaves = game.leaf_values(&us);
    let mut slot = vec![usize::MAX; game.nodes.len()];
    for (k, &d) in decisions.iter().enumerate() {
        slot[d] = k;
    }

    let mut digits = vec![0usize; decisions.len()];
    let mut values = leaves.clone();
    for _ in 0..total {
        if profile_is_subgame_perfect(game, &digits, &slot, &mut values) {
            let mut profile = StrategyProfile::new();
            for (k, &d) in decisions.iter().enumerate() {
                profile.choices.insert(d, game.actions(d)[digits[k]].label.clone());
            }
            return induced_outcome(game, utilities, &profile);
        }
        // Odometer increment, last decision node fastest.
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < radix[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Err(Error::InvalidGame(
        "no pure profile passed the one-deviation test".into(),
    ))
}

/// Evaluates the profile bottom-up and checks the tie-broken best-response
/// condition at every decision node.
fn profile_is_subgame_perfect(
    game: &GameTree,
    digits: &[usize],
    slot: &[usize],
    values: &mut [Vec<f64>],
) -> bool {
    let mut ok = true;
    let mut children_values: Vec<f64> = Vec::new();
    for &id in &game.postorder {
        match &game.nodes[id] {
            Node::Decision { player, actions, .. } => {
                let owner = game.player_index(player);
                children_values.clear();
                children_values.extend(actions.iter().map(|a| values[a.child][owner]));
                let chosen = digits[slot[id]];
                if argmax_first(&children_values) != Some(chosen) {
                    ok = false;
                }
                let v = values[actions[chosen].child].clone();
                values[id] = v;
            }
            Node::Chance { branches } => {
                let mut v = vec![0.0; game.players.len()];
                for b in branches {
                    for (acc, x) in v.iter_mut().zip(&values[b.child]) {
                        *acc += b.probability * x;
                    }
                }
                values[id] = v;
            }
            Node::Terminal { .. } => {}
        }
        if !ok {
            return false;
        }
    }
    ok
}

/// Largest gain any owner gets by deviating at a single decision node while
/// the rest of the profile stays fixed, measured in that node's subgame.
pub fn max_single_deviation_gain(
    game: &GameTree,
    utilities: &BTreeMap<String, UtilityFunction>,
    profile: &StrategyProfile,
) -> Result<f64> {
    let us = game.utilities_in_order(utilities)?;
    let mut values = game.leaf_values(&us);
    let mut worst = f64::NEG_INFINITY;
    for &id in &game.postorder {
        match &game.nodes[id] {
            Node::Decision { player, actions, .. } => {
                let owner = game.player_index(player);
                let chosen = profile.action_index(game, id)?;
                let here = values[actions[chosen].child][owner];
                for a in actions {
                    worst = worst.max(values[a.child][owner] - here);
                }
                values[id] = values[actions[chosen].child].clone();
            }
            Node::Chance { branches } => {
                let mut v = vec![0.0; game.players.len()];
                for b in branches {
                    for (acc, x) in v.iter_mut().zip(&values[b.child]) {
                        *acc += b.probability * x;
                    }
                }
                values[id] = v;
            }
            Node::Terminal { .. } => {}
        }
    }
    Ok(worst.max(0.0))
}
