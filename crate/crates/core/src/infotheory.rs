//! The mutual-information reward, in bits.
//!
//! The per-step reward for sensing cell `a` is the mutual information between
//! the observation and the post-transition target state.  Because the sensor
//! reads only the sensed cell and targets are independent, every other
//! target's entropy cancels between the prior and posterior terms, so the
//! reward collapses to the sensed marginal alone:
//!
//! ```text
//! I(b, a) = h(p') - sum_z P(z|a,b) · h(posterior_z)      p' = w_a-step of p_a
//! ```
//!
//! with `h` the binary entropy.  [`sensed_mutual_information`] computes this
//! O(1) reduction; [`mutual_information_bruteforce`] computes the same
//! quantity from the full joint over all `2^M` target configurations, and the
//! tests pin the two against each other.

use crate::belief::{posterior_parts, FactoredBelief};
use crate::error::{Error, Result};
use crate::model::MonitoringModel;

/// Binary entropy in bits.  Defined as 0 at the endpoints; inputs outside
/// `(0, 1)` (which can only arise from caller bugs, not from the filter) are
/// treated as deterministic.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Mutual information earned by sensing cell `a` when the sensed cell's
/// current presence marginal is `p`.  This is the whole reward: it does not
/// depend on the agent's location or on any other target.
pub fn sensed_mutual_information(p: f64, a: usize, model: &MonitoringModel) -> f64 {
    let predicted = model.chains_sensed()[a].step(p);
    let prior = binary_entropy(predicted);
    let mut conditional = 0.0;
    for z in 0..=1u8 {
        let (num, eta) = posterior_parts(predicted, z, model);
        if eta > 0.0 {
            conditional += eta * binary_entropy(num / eta);
        }
    }
    prior - conditional
}

/// Mutual information reward for taking action `a` in belief `b`.
///
/// # Panics
///
/// Panics if `a` is not a valid cell index for the belief.
pub fn mutual_information(belief: &FactoredBelief, a: usize, model: &MonitoringModel) -> f64 {
    sensed_mutual_information(belief.marginals()[a], a, model)
}

/// The product joint over all `2^m` target configurations; configuration `s`
/// holds target `i` present iff bit `i` of `s` is set.
pub fn joint_from_marginals(marginals: &[f64]) -> Vec<f64> {
    let m = marginals.len();
    assert!(m <= 20, "joint construction is exponential in the target count");
    (0..1usize << m)
        .map(|s| {
            (0..m)
                .map(|i| {
                    if (s >> i) & 1 == 1 {
                        marginals[i]
                    } else {
                        1.0 - marginals[i]
                    }
                })
                .product()
        })
        .collect()
}

fn joint_entropy(dist: &[f64]) -> f64 {
    dist.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Reference implementation of the reward on an explicit joint distribution
/// over target configurations: predict the full joint under action `a`, then
/// compute `H(Y') - sum_z P(z) H(Y'|z)` with joint entropies.
///
/// Exponential in the number of targets; exists to validate
/// [`sensed_mutual_information`], not to be fast.
pub fn mutual_information_bruteforce(
    joint: &[f64],
    a: usize,
    model: &MonitoringModel,
) -> Result<f64> {
    let m = model.num_cells();
    if joint.len() != 1usize << m {
        return Err(Error::CountMismatch {
            what: "joint entries",
            expected: 1usize << m,
            got: joint.len(),
        });
    }
    if a >= m {
        return Err(Error::InvalidCell { cell: a, cells: m });
    }
    for &p in joint {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadParameter {
                name: "joint entry",
                value: p,
                expected: "[0, 1]",
            });
        }
    }
    let total: f64 = joint.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::UnnormalizedJoint { sum: total });
    }

    // Predict the joint: each configuration's mass fans out over successors
    // target by target.
    let mut predicted = vec![0.0; joint.len()];
    for (s, &mass) in joint.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let mut partial = vec![(0usize, mass)];
        for i in 0..m {
            let chain = model.chain_for(i, a);
            let p_on = if (s >> i) & 1 == 1 {
                chain.p11()
            } else {
                chain.p01()
            };
            let mut next = Vec::with_capacity(partial.len() * 2);
            for &(t, w) in &partial {
                next.push((t, w * (1.0 - p_on)));
                next.push((t | (1 << i), w * p_on));
            }
            partial = next;
        }
        for (t, w) in partial {
            predicted[t] += w;
        }
    }

    let prior = joint_entropy(&predicted);
    let mut conditional = 0.0;
    for z in 0..=1u8 {
        let weighted: Vec<f64> = predicted
            .iter()
            .enumerate()
            .map(|(s, &mass)| mass * model.observation_likelihood(z, ((s >> a) & 1) as u8))
            .collect();
        let eta: f64 = weighted.iter().sum();
        if eta > 0.0 {
            let posterior: Vec<f64> = weighted.iter().map(|w| w / eta).collect();
            conditional += eta * joint_entropy(&posterior);
        }
    }
    Ok(prior - conditional)
}
