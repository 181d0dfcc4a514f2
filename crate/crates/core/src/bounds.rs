//! Lower and upper bounds on the optimal finite-horizon value.
//!
//! The lower bound is the value of the greedy policy (pick the action with
//! the best immediate reward, forever).  The upper bounds come from sensor
//! relaxations: drop the movement constraint and let the agent sense any cell
//! in a fixed set — every cell ([`BoundKind::Universal`]) or every cell
//! reachable within the remaining horizon ([`BoundKind::KStep`]).  When
//! unsensed targets are frozen (identity unsensed chains) the relaxation is a
//! multi-armed bandit whose arms' beliefs never change while idle, and the
//! greedy policy is optimal for it — so the relaxed greedy value is the
//! relaxed optimum and therefore an upper bound on the constrained optimum:
//!
//! ```text
//! greedy ≤ V* ≤ upper(KStep) ≤ upper(Universal)
//! ```
//!
//! All recursions share one arithmetic shape with the exact searches,
//! `r + gamma·(p0·v0 + p1·v1)` with the z = 0 branch first, so equalities
//! between algorithms hold bitwise, not just within tolerance.
//!
//! [`BoundEvaluator`] memoizes both recursions for use inside branch-and-bound,
//! where sibling subtrees revisit the same beliefs, and counts how often the
//! search asks for a bound.

use std::collections::HashMap;

use crate::belief::{bayes_update, observation_prior, predict_marginals, FactoredBelief};
use crate::error::{Error, Result};
use crate::infotheory::sensed_mutual_information;
use crate::model::MonitoringModel;
use crate::reachability::{relaxed_actions_k, relaxed_actions_universal, CellSet};

/// Which sensor relaxation an upper bound is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Arms are all cells of the grid, regardless of position or horizon.
    Universal,
    /// Arms are the cells whose action is available within the remaining
    /// horizon from the current cell.
    KStep,
}

/// A greedy lower bound paired with a relaxation upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

/// Arm with the best immediate reward, smallest index on ties.
fn argmax_reward(
    marginals: &[f64],
    actions: CellSet,
    model: &MonitoringModel,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for a in actions.iter() {
        let mi = sensed_mutual_information(marginals[a], a, model);
        match best {
            Some((_, top)) if mi <= top => {}
            _ => best = Some((a, mi)),
        }
    }
    best
}

/// The greedy action in `b` among `actions`: maximal immediate mutual
/// information, ties broken towards the smallest cell index.
pub fn greedy_action(
    belief: &FactoredBelief,
    actions: CellSet,
    model: &MonitoringModel,
) -> Result<usize> {
    argmax_reward(belief.marginals(), actions, model)
        .map(|(a, _)| a)
        .ok_or(Error::EmptyActionSet)
}

/// Value of the movement-constrained greedy policy over `h` steps.  This is
/// the lower bound used to seed branch-and-bound, and doubles as the
/// standalone myopic baseline.
pub fn greedy_value_constrained(belief: &FactoredBelief, h: u32, model: &MonitoringModel) -> f64 {
    if h == 0 {
        return 0.0;
    }
    let (a, r) = argmax_reward(belief.marginals(), model.actions(belief.location()), model)
        .expect("action sets always contain the current cell");
    if h == 1 {
        return r;
    }
    let predicted = predict_marginals(belief.marginals(), a, model);
    let p1 = observation_prior(&predicted, a, model);
    let p0 = 1.0 - p1;
    let mut v0 = 0.0;
    if p0 > 0.0 {
        let posterior =
            bayes_update(&predicted, a, 0, model).expect("observation has positive probability");
        let child = FactoredBelief::from_parts(a, posterior);
        v0 = greedy_value_constrained(&child, h - 1, model);
    }
    let mut v1 = 0.0;
    if p1 > 0.0 {
        let posterior =
            bayes_update(&predicted, a, 1, model).expect("observation has positive probability");
        let child = FactoredBelief::from_parts(a, posterior);
        v1 = greedy_value_constrained(&child, h - 1, model);
    }
    r + model.gamma() * (p0 * v0 + p1 * v1)
}

/// Value of the greedy policy on the relaxation with arm set `actions`: no
/// location, no movement constraint, the same belief dynamics.  Under frozen
/// unsensed targets this equals the relaxed optimum.
pub fn relaxed_greedy_value(
    marginals: &[f64],
    actions: CellSet,
    h: u32,
    model: &MonitoringModel,
) -> Result<f64> {
    if h == 0 {
        return Ok(0.0);
    }
    let (a, r) = argmax_reward(marginals, actions, model).ok_or(Error::EmptyActionSet)?;
    if h == 1 {
        return Ok(r);
    }
    let predicted = predict_marginals(marginals, a, model);
    let p1 = observation_prior(&predicted, a, model);
    let p0 = 1.0 - p1;
    let mut v0 = 0.0;
    if p0 > 0.0 {
        let posterior =
            bayes_update(&predicted, a, 0, model).expect("observation has positive probability");
        v0 = relaxed_greedy_value(&posterior, actions, h - 1, model)?;
    }
    let mut v1 = 0.0;
    if p1 > 0.0 {
        let posterior =
            bayes_update(&predicted, a, 1, model).expect("observation has positive probability");
        v1 = relaxed_greedy_value(&posterior, actions, h - 1, model)?;
    }
    Ok(r + model.gamma() * (p0 * v0 + p1 * v1))
}

fn relaxation_arms(
    belief: &FactoredBelief,
    h: u32,
    kind: BoundKind,
    model: &MonitoringModel,
) -> CellSet {
    match kind {
        BoundKind::Universal => relaxed_actions_universal(model),
        BoundKind::KStep => relaxed_actions_k(belief.location(), h, model),
    }
}

/// Upper bound on the optimal `h`-step value from `belief`, from the chosen
/// sensor relaxation.  The k-step variant uses k = `h`, the remaining horizon
/// at this node.
pub fn upper_bound(
    belief: &FactoredBelief,
    h: u32,
    kind: BoundKind,
    model: &MonitoringModel,
) -> f64 {
    if h == 0 {
        return 0.0;
    }
    let arms = relaxation_arms(belief, h, kind, model);
    relaxed_greedy_value(belief.marginals(), arms, h, model)
        .expect("relaxed arm sets are never empty")
}

/// Both bounds at once.
pub fn bound_pair(
    belief: &FactoredBelief,
    h: u32,
    kind: BoundKind,
    model: &MonitoringModel,
) -> BoundPair {
    BoundPair {
        lower: greedy_value_constrained(belief, h, model),
        upper: upper_bound(belief, h, kind, model),
    }
}

type MarginalBits = Box<[u64]>;

fn marginal_bits(marginals: &[f64]) -> MarginalBits {
    marginals.iter().map(|p| p.to_bits()).collect()
}

/// Memoizing bound oracle for a single search invocation.
///
/// Keys are exact bit patterns, so a cache hit returns the identical f64 the
/// plain recursions in this module would produce; the caches only ever spare
/// work, never change results.  `queries` counts the bounds the *search*
/// asked for ([`BoundEvaluator::greedy_lower`] and [`BoundEvaluator::upper`]
/// calls), not internal recursion steps.
pub struct BoundEvaluator<'m> {
    model: &'m MonitoringModel,
    greedy_cache: HashMap<(usize, MarginalBits, u32), f64>,
    relaxed_cache: HashMap<(MarginalBits, u64, u32), f64>,
    queries: u64,
}

impl<'m> BoundEvaluator<'m> {
    pub fn new(model: &'m MonitoringModel) -> Self {
        BoundEvaluator {
            model,
            greedy_cache: HashMap::new(),
            relaxed_cache: HashMap::new(),
            queries: 0,
        }
    }

    /// Number of bound queries served so far.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    /// Memoized [`greedy_value_constrained`].
    pub fn greedy_lower(&mut self, belief: &FactoredBelief, h: u32) -> f64 {
        self.queries += 1;
        self.greedy_rec(belief, h)
    }

    /// Memoized [`upper_bound`].
    pub fn upper(&mut self, belief: &FactoredBelief, h: u32, kind: BoundKind) -> f64 {
        self.queries += 1;
        if h == 0 {
            return 0.0;
        }
        let arms = relaxation_arms(belief, h, kind, self.model);
        self.relaxed_rec(belief.marginals(), arms, h)
    }

    fn greedy_rec(&mut self, belief: &FactoredBelief, h: u32) -> f64 {
        if h == 0 {
            return 0.0;
        }
        let key = (belief.location(), marginal_bits(belief.marginals()), h);
        if let Some(&v) = self.greedy_cache.get(&key) {
            return v;
        }
        let model = self.model;
        let (a, r) = argmax_reward(belief.marginals(), model.actions(belief.location()), model)
            .expect("action sets always contain the current cell");
        let value = if h == 1 {
            r
        } else {
            let predicted = predict_marginals(belief.marginals(), a, model);
            let p1 = observation_prior(&predicted, a, model);
            let p0 = 1.0 - p1;
            let mut v0 = 0.0;
            if p0 > 0.0 {
                let posterior = bayes_update(&predicted, a, 0, model)
                    .expect("observation has positive probability");
                let child = FactoredBelief::from_parts(a, posterior);
                v0 = self.greedy_rec(&child, h - 1);
            }
            let mut v1 = 0.0;
            if p1 > 0.0 {
                let posterior = bayes_update(&predicted, a, 1, model)
                    .expect("observation has positive probability");
                let child = FactoredBelief::from_parts(a, posterior);
                v1 = self.greedy_rec(&child, h - 1);
            }
            r + model.gamma() * (p0 * v0 + p1 * v1)
        };
        self.greedy_cache.insert(key, value);
        value
    }

    fn relaxed_rec(&mut self, marginals: &[f64], arms: CellSet, h: u32) -> f64 {
        if h == 0 {
            return 0.0;
        }
        let key = (marginal_bits(marginals), arms.bits(), h);
        if let Some(&v) = self.relaxed_cache.get(&key) {
            return v;
        }
        let model = self.model;
        let (a, r) =
            argmax_reward(marginals, arms, model).expect("relaxed arm sets are never empty");
        let value = if h == 1 {
            r
        } else {
            let predicted = predict_marginals(marginals, a, model);
            let p1 = observation_prior(&predicted, a, model);
            let p0 = 1.0 - p1;
            let mut v0 = 0.0;
            if p0 > 0.0 {
                let posterior = bayes_update(&predicted, a, 0, model)
                    .expect("observation has positive probability");
                v0 = self.relaxed_rec(&posterior, arms, h - 1);
            }
            let mut v1 = 0.0;
            if p1 > 0.0 {
                let posterior = bayes_update(&predicted, a, 1, model)
                    .expect("observation has positive probability");
                v1 = self.relaxed_rec(&posterior, arms, h - 1);
            }
            r + model.gamma() * (p0 * v0 + p1 * v1)
        };
        self.relaxed_cache.insert(key, value);
        value
    }
}
