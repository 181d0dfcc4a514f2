//! Monte Carlo tree search over the belief MDP, as a sampling baseline.
//!
//! Unlike the searches in [`crate::search`], nothing here enumerates
//! observation branches: each simulation samples one observation per step
//! from the belief's own predictive distribution, descends (or expands) the
//! corresponding child, and backs the discounted return up the visited arms.
//! Beliefs and rewards stay exact — only the traversal is sampled — so with
//! enough simulations the arm means converge to the true Q-values.
//!
//! Conventions, all deterministic given the seed: untried actions are
//! expanded in ascending cell order; tried actions are chosen by UCB1
//! (`mean + c·sqrt(ln N / n)`), ties to the smallest cell; one tree node is
//! added per simulation; positions beyond the frontier are scored by a
//! uniform-random rollout; the recommendation is the root arm with the
//! highest mean.  Per step, the generator draws the rollout action (if in
//! rollout) and then the observation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::{bayes_update, observation_prior, predict_marginals, FactoredBelief};
use crate::infotheory::mutual_information;
use crate::model::MonitoringModel;

/// Tuning knobs for [`recommend`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MctsParams {
    pub simulations: u32,
    pub exploration_constant: f64,
    pub seed: u64,
}

impl MctsParams {
    /// Parameters with the default exploration constant of 1.0.
    pub fn new(simulations: u32, seed: u64) -> Self {
        MctsParams {
            simulations,
            exploration_constant: 1.0,
            seed,
        }
    }
}

struct Node {
    belief: FactoredBelief,
    /// Legal actions, ascending.
    actions: Vec<usize>,
    counts: Vec<u64>,
    means: Vec<f64>,
    visits: u64,
    /// Child node per (action, observation) edge.
    children: HashMap<(usize, u8), usize>,
}

struct Tree<'m> {
    nodes: Vec<Node>,
    model: &'m MonitoringModel,
    rng: ChaCha8Rng,
    exploration: f64,
}

impl<'m> Tree<'m> {
    fn new_node(&mut self, belief: FactoredBelief) -> usize {
        let actions: Vec<usize> = self.model.actions(belief.location()).iter().collect();
        let arms = actions.len();
        self.nodes.push(Node {
            belief,
            actions,
            counts: vec![0; arms],
            means: vec![0.0; arms],
            visits: 0,
            children: HashMap::new(),
        });
        self.nodes.len() - 1
    }

    fn select_arm(&self, idx: usize) -> usize {
        let node = &self.nodes[idx];
        if let Some(untried) = node.counts.iter().position(|&n| n == 0) {
            return untried;
        }
        let ln_visits = (node.visits as f64).ln();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..node.actions.len() {
            let bonus = self.exploration * (ln_visits / node.counts[i] as f64).sqrt();
            let score = node.means[i] + bonus;
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        best
    }

    fn simulate(&mut self, idx: usize, h: u32) -> f64 {
        if h == 0 {
            return 0.0;
        }
        let arm = self.select_arm(idx);
        let a = self.nodes[idx].actions[arm];
        let (reward, predicted, p1) = {
            let belief = &self.nodes[idx].belief;
            let reward = mutual_information(belief, a, self.model);
            let predicted = predict_marginals(belief.marginals(), a, self.model);
            let p1 = observation_prior(&predicted, a, self.model);
            (reward, predicted, p1)
        };
        let z: u8 = u8::from(self.rng.gen::<f64>() < p1);
        let future = match self.nodes[idx].children.get(&(a, z)).copied() {
            Some(child) => self.simulate(child, h - 1),
            None => {
                // A sampled observation always has positive probability.
                let posterior = bayes_update(&predicted, a, z, self.model)
                    .expect("sampled observation has positive probability");
                let child = self.new_node(FactoredBelief::from_parts(a, posterior));
                self.nodes[idx].children.insert((a, z), child);
                self.rollout(child, h - 1)
            }
        };
        let value = reward + self.model.gamma() * future;
        debug_assert!(
            (-1e-9..=h as f64 + 1e-9).contains(&value),
            "simulation return {value} outside [0, {h}]"
        );
        let node = &mut self.nodes[idx];
        node.counts[arm] += 1;
        node.means[arm] += (value - node.means[arm]) / node.counts[arm] as f64;
        node.visits += 1;
        value
    }

    fn rollout(&mut self, idx: usize, depth: u32) -> f64 {
        let mut belief = self.nodes[idx].belief.clone();
        let mut total = 0.0;
        let mut discount = 1.0;
        for _ in 0..depth {
            let actions = self.model.actions(belief.location());
            let pick = self.rng.gen_range(0..actions.len());
            let a = actions.iter().nth(pick).expect("action sets are never empty");
            total += discount * mutual_information(&belief, a, self.model);
            let predicted = predict_marginals(belief.marginals(), a, self.model);
            let p1 = observation_prior(&predicted, a, self.model);
            let z: u8 = u8::from(self.rng.gen::<f64>() < p1);
            let posterior = bayes_update(&predicted, a, z, self.model)
                .expect("sampled observation has positive probability");
            belief = FactoredBelief::from_parts(a, posterior);
            discount *= self.model.gamma();
        }
        total
    }
}

/// Run Monte Carlo tree search from `belief` to depth `h` and return the
/// recommended action (highest root mean; ties to the smallest cell; the
/// smallest legal cell if no simulation completed).
///
/// # Panics
///
/// Panics if `h` is zero.
pub fn recommend(
    belief: &FactoredBelief,
    h: u32,
    params: &MctsParams,
    model: &MonitoringModel,
) -> usize {
    assert!(h >= 1, "search horizon must be at least 1");
    let mut tree = Tree {
        nodes: Vec::new(),
        model,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        exploration: params.exploration_constant,
    };
    let root = tree.new_node(belief.clone());
    for _ in 0..params.simulations {
        tree.simulate(root, h);
    }
    let node = &tree.nodes[root];
    let mut best: Option<(usize, f64)> = None;
    for i in 0..node.actions.len() {
        if node.counts[i] == 0 {
            continue;
        }
        match best {
            Some((_, top)) if node.means[i] <= top => {}
            _ => best = Some((node.actions[i], node.means[i])),
        }
    }
    best.map_or(node.actions[0], |(a, _)| a)
}
