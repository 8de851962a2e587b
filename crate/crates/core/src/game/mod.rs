//! Exact solvers: perfect-information trees with chance moves, 2×2 games,
//! signaling games and two-strategy replicator dynamics.

pub mod normal_form;
pub mod signaling;
pub mod tree;

pub use normal_form::{
    replicator_run, replicator_step, solve_2x2, Equilibrium2x2, EquilibriumKind, NormalForm2x2,
};
pub use signaling::{solve_signaling, Message, Pbe, PbeReport, SignalingGame};
pub use tree::{
    brute_force_spe, induced_outcome, max_single_deviation_gain, solve_spe, Action, ChanceBranch,
    GameTree, Node, NodeId, SpeSolution, StrategyProfile, TreeBuilder,
};
