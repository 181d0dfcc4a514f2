//! Factored beliefs and the exact Bayes filter.
//!
//! Because the agent's cell is fully observable and the targets are mutually
//! independent, a belief is just the agent's cell plus one Bernoulli marginal
//! per target — and it stays that way.  Prediction evolves each marginal by
//! its own chain, and the observation concerns only the sensed target, so
//! conditioning never couples targets: the posterior is again a product
//! distribution.  The joint-distribution oracle in the tests checks this
//! against exhaustive filtering over all `2^M` target configurations.
//!
//! The posterior for the sensed marginal is computed as `num / eta` with
//! `num = P(z|y=1)·p` and `eta = num + P(z|y=0)·(1-p)`.  Both terms are
//! non-negative and `eta` is their sum with another non-negative term, so the
//! quotient lands in `[0, 1]` by construction; no clamping anywhere.

use crate::error::{Error, Result};
use crate::model::MonitoringModel;

/// A belief state: the (known) agent cell and one presence marginal per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredBelief {
    location: usize,
    marginals: Vec<f64>,
}

impl FactoredBelief {
    pub fn new(location: usize, marginals: Vec<f64>) -> Result<Self> {
        if location >= marginals.len() {
            return Err(Error::InvalidCell {
                cell: location,
                cells: marginals.len(),
            });
        }
        for &p in &marginals {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadParameter {
                    name: "marginal",
                    value: p,
                    expected: "[0, 1]",
                });
            }
        }
        Ok(FactoredBelief { location, marginals })
    }

    /// Internal constructor for beliefs produced by the filter itself, whose
    /// marginals are in range by construction.
    pub(crate) fn from_parts(location: usize, marginals: Vec<f64>) -> Self {
        debug_assert!(location < marginals.len());
        debug_assert!(marginals.iter().all(|p| (0.0..=1.0).contains(p)));
        FactoredBelief { location, marginals }
    }

    pub fn location(&self) -> usize {
        self.location
    }

    pub fn marginals(&self) -> &[f64] {
        &self.marginals
    }

    pub fn num_targets(&self) -> usize {
        self.marginals.len()
    }
}

/// Predictive marginals after sensing cell `a`: target `a` steps by its
/// sensed chain, every other target by its unsensed chain.
///
/// This is independent of the agent's location, which is what the bandit
/// relaxations exploit — they reuse exactly this dynamics with the movement
/// constraint dropped.
pub fn predict_marginals(marginals: &[f64], a: usize, model: &MonitoringModel) -> Vec<f64> {
    marginals
        .iter()
        .enumerate()
        .map(|(i, &p)| model.chain_for(i, a).step(p))
        .collect()
}

/// Predictive marginals for a belief, validating the sensed cell index.
/// Movement legality is not checked here; [`tau`] does that.
pub fn predict(belief: &FactoredBelief, a: usize, model: &MonitoringModel) -> Result<Vec<f64>> {
    if a >= model.num_cells() {
        return Err(Error::InvalidCell {
            cell: a,
            cells: model.num_cells(),
        });
    }
    Ok(predict_marginals(belief.marginals(), a, model))
}

/// Unnormalized posterior and normalizer for a sensed predictive marginal `p`
/// under observation `z`: returns `(P(z|y=1)·p, P(z|a,b))`.  The posterior is
/// the quotient; the second component is the observation probability.
pub(crate) fn posterior_parts(p: f64, z: u8, model: &MonitoringModel) -> (f64, f64) {
    let num = model.observation_likelihood(z, 1) * p;
    let eta = num + model.observation_likelihood(z, 0) * (1.0 - p);
    (num, eta)
}

/// `P(z = 1 | a, b)` given the predictive marginals for action `a`.
pub fn observation_prior(predicted: &[f64], a: usize, model: &MonitoringModel) -> f64 {
    let (_, eta) = posterior_parts(predicted[a], 1, model);
    eta
}

/// Condition predictive marginals on observation `z` of cell `a`.  Only the
/// sensed marginal changes.  Fails if `z` has zero probability under `b`.
pub fn bayes_update(
    predicted: &[f64],
    a: usize,
    z: u8,
    model: &MonitoringModel,
) -> Result<Vec<f64>> {
    let (num, eta) = posterior_parts(predicted[a], z, model);
    if eta <= 0.0 {
        return Err(Error::ZeroProbabilityObservation {
            action: a,
            observation: z,
        });
    }
    let mut posterior = predicted.to_vec();
    posterior[a] = num / eta;
    Ok(posterior)
}

/// The full belief transition `tau(b, a, z)`: move to cell `a` (checking the
/// move is legal), predict every marginal, and condition on the observation.
pub fn tau(
    belief: &FactoredBelief,
    a: usize,
    z: u8,
    model: &MonitoringModel,
) -> Result<FactoredBelief> {
    let next_location = model.internal_transition(belief.location(), a)?;
    let predicted = predict_marginals(belief.marginals(), a, model);
    let posterior = bayes_update(&predicted, a, z, model)?;
    Ok(FactoredBelief::from_parts(next_location, posterior))
}
