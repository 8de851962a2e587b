//! Seeded random game trees shared by the acceptance and property suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use selfmod::game::{GameTree, NodeId, TreeBuilder};
use selfmod::utility::{FeatureVector, UtilityFunction};

pub const PLAYERS: [&str; 3] = ["a", "b", "c"];

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    builder: TreeBuilder,
    budget: usize,
    named: usize,
}

impl Gen<'_> {
    fn leaf(&mut self) -> NodeId {
        // Small integer features make payoff ties common, which exercises tie-breaking.
        let outcomes: Vec<(&str, FeatureVector)> = PLAYERS
            .iter()
            .map(|p| {
                let f = FeatureVector::new()
                    .with("x", self.rng.gen_range(0..4) as f64)
                    .with("y", self.rng.gen_range(0..4) as f64);
                (*p, f)
            })
            .collect();
        self.builder.terminal(&outcomes)
    }

    fn node(&mut self, depth: usize) -> NodeId {
        if self.budget == 0 || depth >= 6 || (depth > 0 && self.rng.gen_bool(0.3)) {
            return self.leaf();
        }
        if depth > 0 && self.rng.gen_bool(0.15) {
            let a = self.node(depth + 1);
            let b = self.node(depth + 1);
            let p = self.rng.gen_range(1..4) as f64 / 4.0;
            return self.builder.chance(&[(p, a), (1.0 - p, b)]);
        }
        self.budget -= 1;
        let k = self.rng.gen_range(2..=3);
        let labels = ["L", "M", "R"];
        let children: Vec<NodeId> = (0..k).map(|_| self.node(depth + 1)).collect();
        let actions: Vec<(&str, NodeId)> = labels.iter().copied().zip(children).collect();
        let player = PLAYERS[self.rng.gen_range(0..PLAYERS.len())];
        let name = format!("d{}", self.named);
        self.named += 1;
        self.builder.decision(player, &name, &actions)
    }
}

/// A perfect-information tree with at most `max_decisions` decision nodes,
/// plus one utility function per player over features `x` and `y`.
pub fn random_game(seed: u64, max_decisions: usize) -> (GameTree, BTreeMap<String, UtilityFunction>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = rng.gen_range(1..=max_decisions);
    let mut g = Gen {
        rng: &mut rng,
        builder: TreeBuilder::new(&PLAYERS),
        budget,
        named: 0,
    };
    let root = g.node(0);
    let tree = g.builder.build(root).expect("generated trees are well formed");
    let utilities = PLAYERS
        .iter()
        .map(|p| {
            let wx = rng.gen_range(-2..=2) as f64;
            let wy = rng.gen_range(-2..=2) as f64;
            let u = UtilityFunction::new([("x", wx), ("y", wy)]).unwrap_or_else(|_| UtilityFunction::single("x", 1.0));
            (p.to_string(), u)
        })
        .collect();
    (tree, utilities)
}
