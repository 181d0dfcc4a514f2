//! Belief-space planning for grid monitoring with mutual-information rewards.
//!
//! An agent moves on a small grid and points a noisy binary sensor at its own
//! cell; each cell hosts a two-state Markov target.  The agent's position is
//! fully observable, target states are not, and the per-step reward is the
//! mutual information between the sensed observation and the target state —
//! so planning means steering the belief towards informative cells.
//!
//! The crate provides the exact factored Bayes filter ([`belief`]), the
//! information-theoretic reward ([`infotheory`]), multi-armed-bandit
//! relaxations that upper-bound the optimal value ([`bounds`], [`reachability`]),
//! exhaustive and branch-and-bound finite-horizon searches ([`search`]), and a
//! Monte Carlo tree search baseline ([`mcts`]).  Benchmark instance samplers
//! and a text serialization format live in [`model`].
//!
//! All randomness flows through explicitly seeded ChaCha8 generators with
//! sub-seeds derived by [`model::mix_seed`], so every result in the crate is
//! reproducible from a single master seed.

pub mod belief;
pub mod bounds;
pub mod error;
pub mod infotheory;
pub mod mcts;
pub mod model;
pub mod reachability;
pub mod search;

pub use belief::{bayes_update, observation_prior, predict, predict_marginals, tau, FactoredBelief};
pub use bounds::{
    bound_pair, greedy_action, greedy_value_constrained, relaxed_greedy_value, upper_bound,
    BoundEvaluator, BoundKind, BoundPair,
};
pub use error::{Error, Result};
pub use infotheory::{
    binary_entropy, joint_from_marginals, mutual_information, mutual_information_bruteforce,
    sensed_mutual_information,
};
pub use mcts::{recommend, MctsParams};
pub use model::{
    format_real, mix_seed, parse_instance, write_instance, ExperimentCase, InstanceSampler,
    MarkovChainParams, MonitoringModel, TargetRate,
};
pub use reachability::{
    reachable_k, reachable_one_step, relaxed_actions_k, relaxed_actions_universal, CellSet,
};
pub use search::{exhaustive, q_value, rtbss, ActionValue, SearchResult, SearchStats};
