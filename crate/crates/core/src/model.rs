//! The monitoring domain: a sensing agent on a four-connected grid, one binary
//! target per cell, and a noisy single-cell presence sensor.
//!
//! The agent's own cell is fully observable and moves deterministically: an
//! action names the destination, which must be the current cell or one of its
//! grid neighbours.  Each cell `i` hosts a two-state Markov target.  On a step
//! where the agent senses cell `i` the target's presence bit evolves by the
//! chain `w_i = chains_sensed[i]`; otherwise it evolves by
//! `r_i = chains_unsensed[i]`.  The sensor then reports one bit about the
//! sensed cell:
//!
//! ```text
//! P(z=0 | y_a=0) = 1 - q_minus        P(z=0 | y_a=1) = q_plus
//! P(z=1 | y_a=0) = q_minus            P(z=1 | y_a=1) = 1 - q_plus
//! ```
//!
//! Everything downstream (belief updates, rewards, bounds, searches) is
//! parameterised by [`MonitoringModel`], so the benchmark samplers in this
//! module are the only place where concrete parameter ranges live.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::FactoredBelief;
use crate::error::{Error, Result};
use crate::reachability::{CellSet, MAX_CELLS};

/// Transition parameters of a two-state Markov chain over a presence bit:
/// `p01 = P(present' | absent)` and `p11 = P(present' | present)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovChainParams {
    p01: f64,
    p11: f64,
}

impl MarkovChainParams {
    pub fn new(p01: f64, p11: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p01) {
            return Err(Error::BadParameter {
                name: "p01",
                value: p01,
                expected: "[0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&p11) {
            return Err(Error::BadParameter {
                name: "p11",
                value: p11,
                expected: "[0, 1]",
            });
        }
        Ok(MarkovChainParams { p01, p11 })
    }

    /// The identity chain `(p01, p11) = (0, 1)`: the bit never changes.
    pub fn identity() -> Self {
        MarkovChainParams { p01: 0.0, p11: 1.0 }
    }

    pub fn is_identity(&self) -> bool {
        self.p01 == 0.0 && self.p11 == 1.0
    }

    pub fn p01(&self) -> f64 {
        self.p01
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    /// Advance a presence probability one step: `p01·(1-p) + p11·p`.
    pub fn step(&self, p: f64) -> f64 {
        self.p01 * (1.0 - p) + self.p11 * p
    }
}

/// A complete monitoring problem: grid geometry, per-target dynamics, sensor
/// error rates, discount, and nominal horizon.
///
/// Cells are indexed row-major: cell `r·width + c` is at row `r`, column `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitoringModel {
    width: usize,
    height: usize,
    chains_sensed: Vec<MarkovChainParams>,
    chains_unsensed: Vec<MarkovChainParams>,
    q_minus: f64,
    q_plus: f64,
    gamma: f64,
    horizon: u32,
    /// Precomputed `A(x)` for every cell; actions are consulted at every
    /// search node, so this is worth caching up front.
    action_sets: Vec<CellSet>,
}

impl MonitoringModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        width: usize,
        height: usize,
        chains_sensed: Vec<MarkovChainParams>,
        chains_unsensed: Vec<MarkovChainParams>,
        q_minus: f64,
        q_plus: f64,
        gamma: f64,
        horizon: u32,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        let cells = width * height;
        if cells > MAX_CELLS {
            return Err(Error::GridTooLarge {
                cells,
                max: MAX_CELLS,
            });
        }
        if chains_sensed.len() != cells {
            return Err(Error::CountMismatch {
                what: "sensed chains",
                expected: cells,
                got: chains_sensed.len(),
            });
        }
        if chains_unsensed.len() != cells {
            return Err(Error::CountMismatch {
                what: "unsensed chains",
                expected: cells,
                got: chains_unsensed.len(),
            });
        }
        // The sensor must not be worse than chance; the 0.5 endpoint (a
        // completely uninformative sensor) is permitted as a degenerate case.
        for (name, q) in [("q_minus", q_minus), ("q_plus", q_plus)] {
            if !(0.0..=0.5).contains(&q) {
                return Err(Error::BadParameter {
                    name,
                    value: q,
                    expected: "[0, 0.5]",
                });
            }
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::BadParameter {
                name: "gamma",
                value: gamma,
                expected: "[0, 1]",
            });
        }
        if horizon == 0 {
            return Err(Error::BadParameter {
                name: "horizon",
                value: 0.0,
                expected: "at least 1",
            });
        }
        let action_sets = (0..cells)
            .map(|x| {
                let (r, c) = (x / width, x % width);
                let mut set = CellSet::singleton(x);
                if r > 0 {
                    set.insert(x - width);
                }
                if r + 1 < height {
                    set.insert(x + width);
                }
                if c > 0 {
                    set.insert(x - 1);
                }
                if c + 1 < width {
                    set.insert(x + 1);
                }
                set
            })
            .collect();
        Ok(MonitoringModel {
            width,
            height,
            chains_sensed,
            chains_unsensed,
            q_minus,
            q_plus,
            gamma,
            horizon,
            action_sets,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn q_minus(&self) -> f64 {
        self.q_minus
    }

    pub fn q_plus(&self) -> f64 {
        self.q_plus
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn chains_sensed(&self) -> &[MarkovChainParams] {
        &self.chains_sensed
    }

    pub fn chains_unsensed(&self) -> &[MarkovChainParams] {
        &self.chains_unsensed
    }

    /// The chain that drives target `i` when action `a` is taken.
    pub fn chain_for(&self, target: usize, action: usize) -> &MarkovChainParams {
        if target == action {
            &self.chains_sensed[target]
        } else {
            &self.chains_unsensed[target]
        }
    }

    /// Legal actions from cell `x`: the cell itself plus its grid neighbours.
    pub fn actions(&self, x: usize) -> CellSet {
        self.action_sets[x]
    }

    /// Deterministic movement: the action names the destination cell.
    pub fn internal_transition(&self, x: usize, a: usize) -> Result<usize> {
        if x >= self.num_cells() {
            return Err(Error::InvalidCell {
                cell: x,
                cells: self.num_cells(),
            });
        }
        if !self.actions(x).contains(a) {
            return Err(Error::IllegalMove { from: x, action: a });
        }
        Ok(a)
    }

    /// `P(z | y_a)` for the binary sensor.
    pub fn observation_likelihood(&self, z: u8, y: u8) -> f64 {
        assert!(z <= 1 && y <= 1, "observation and presence bit are binary");
        match (z, y) {
            (0, 0) => 1.0 - self.q_minus,
            (0, 1) => self.q_plus,
            (1, 0) => self.q_minus,
            (1, 1) => 1.0 - self.q_plus,
            _ => unreachable!(),
        }
    }

    /// True when every unsensed chain is the identity, i.e. targets only move
    /// while being sensed.  The bandit-relaxation bounds are exact upper
    /// bounds precisely in this regime.
    pub fn satisfies_property2(&self) -> bool {
        self.chains_unsensed.iter().all(|c| c.is_identity())
    }
}

// ── Instance sampling ────────────────────────────────────────────────────────

/// Which benchmark family an [`InstanceSampler`] draws from.
///
/// Case 1 pairs slow sensed dynamics with identity unsensed dynamics (targets
/// freeze while unobserved).  Case 2 uses the same chain while sensed and
/// unsensed (`r_i = w_i`), at one of three speeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentCase {
    Case1,
    Case2(TargetRate),
}

/// Dynamics speed for Case-2 instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetRate {
    Slow,
    Medium,
    Fast,
}

impl TargetRate {
    /// Sampling intervals for `(p01, p11)`.
    fn ranges(self) -> ((f64, f64), (f64, f64)) {
        match self {
            TargetRate::Slow => ((0.0, 0.2), (0.8, 1.0)),
            TargetRate::Medium => ((0.2, 0.4), (0.6, 0.8)),
            TargetRate::Fast => ((0.4, 0.6), (0.4, 0.6)),
        }
    }
}

impl fmt::Display for ExperimentCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentCase::Case1 => write!(f, "case1"),
            ExperimentCase::Case2(TargetRate::Slow) => write!(f, "case2-slow"),
            ExperimentCase::Case2(TargetRate::Medium) => write!(f, "case2-medium"),
            ExperimentCase::Case2(TargetRate::Fast) => write!(f, "case2-fast"),
        }
    }
}

impl FromStr for ExperimentCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case1" => Ok(ExperimentCase::Case1),
            "case2-slow" => Ok(ExperimentCase::Case2(TargetRate::Slow)),
            "case2-medium" => Ok(ExperimentCase::Case2(TargetRate::Medium)),
            "case2-fast" => Ok(ExperimentCase::Case2(TargetRate::Fast)),
            other => Err(Error::Parse {
                line: 0,
                message: format!(
                    "unknown case `{other}`; expected case1, case2-slow, case2-medium or case2-fast"
                ),
            }),
        }
    }
}

/// One SplitMix64 output step.  Used to derive independent sub-seeds; the
/// constants are the reference ones.
fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the sub-seed for stream `salt` of a master seed.
///
/// Every randomised component of the crate (instance sampling, Monte Carlo
/// search) seeds a ChaCha8 generator with a chain of `mix_seed` calls, so runs
/// are reproducible and parallel workers never share generator state.
pub fn mix_seed(master: u64, salt: u64) -> u64 {
    splitmix64(master ^ splitmix64(salt))
}

/// Deterministic generator of benchmark instances on the standard 6×6 grid
/// with `q_minus = q_plus = 0.05` and `gamma = 0.95`.
///
/// Instance `i` is drawn from a ChaCha8 stream seeded with
/// `mix_seed(seed, i)`, so `(seed, case, i)` fully determines the instance and
/// instances with different indices are independent.  Draw order: initial
/// location, then one prior marginal per cell, then `(p01, p11)` per cell for
/// the sensed chains.  Case-1 unsensed chains are the identity; Case-2 reuses
/// the sensed chain for each cell without further draws.
#[derive(Debug, Clone, Copy)]
pub struct InstanceSampler {
    seed: u64,
    case: ExperimentCase,
}

/// Grid side of the sampled benchmark instances.
pub const SAMPLER_GRID_SIDE: usize = 6;
/// Sensor error rates of the sampled benchmark instances.
pub const SAMPLER_Q: f64 = 0.05;
/// Discount factor of the sampled benchmark instances.
pub const SAMPLER_GAMMA: f64 = 0.95;
/// Nominal horizon recorded on sampled instances.
pub const SAMPLER_HORIZON: u32 = 6;

impl InstanceSampler {
    pub fn new(seed: u64, case: ExperimentCase) -> Self {
        InstanceSampler { seed, case }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn case(&self) -> ExperimentCase {
        self.case
    }

    /// Sample instance `index`: a model plus an initial belief.
    pub fn sample(&self, index: u64) -> (MonitoringModel, FactoredBelief) {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, index));
        let cells = SAMPLER_GRID_SIDE * SAMPLER_GRID_SIDE;

        let location = rng.gen_range(0..cells);
        let marginals: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.0..=1.0)).collect();

        let rate = match self.case {
            ExperimentCase::Case1 => TargetRate::Slow,
            ExperimentCase::Case2(rate) => rate,
        };
        let ((lo01, hi01), (lo11, hi11)) = rate.ranges();
        let sensed: Vec<MarkovChainParams> = (0..cells)
            .map(|_| {
                let p01 = rng.gen_range(lo01..=hi01);
                let p11 = rng.gen_range(lo11..=hi11);
                MarkovChainParams::new(p01, p11).expect("sampled chain parameters are in range")
            })
            .collect();
        let unsensed = match self.case {
            ExperimentCase::Case1 => vec![MarkovChainParams::identity(); cells],
            ExperimentCase::Case2(_) => sensed.clone(),
        };

        let model = MonitoringModel::new(
            SAMPLER_GRID_SIDE,
            SAMPLER_GRID_SIDE,
            sensed,
            unsensed,
            SAMPLER_Q,
            SAMPLER_Q,
            SAMPLER_GAMMA,
            SAMPLER_HORIZON,
        )
        .expect("sampler parameters are valid");
        let belief = FactoredBelief::new(location, marginals)
            .expect("sampled marginals are valid probabilities");
        (model, belief)
    }
}

// ── Text serialization ───────────────────────────────────────────────────────

/// Render a real with 17 significant digits, enough to round-trip any f64
/// exactly through its decimal representation.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize a model and an initial belief to the line-based `key = value`
/// instance format.  [`parse_instance`] inverts this exactly.
pub fn write_instance(model: &MonitoringModel, belief: &FactoredBelief) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line("width", model.width.to_string());
    line("height", model.height.to_string());
    line("q_minus", format_real(model.q_minus));
    line("q_plus", format_real(model.q_plus));
    line("gamma", format_real(model.gamma));
    line("horizon", model.horizon.to_string());
    for i in 0..model.num_cells() {
        let w = &model.chains_sensed[i];
        let r = &model.chains_unsensed[i];
        line(&format!("sensed_{i}_p01"), format_real(w.p01));
        line(&format!("sensed_{i}_p11"), format_real(w.p11));
        line(&format!("unsensed_{i}_p01"), format_real(r.p01));
        line(&format!("unsensed_{i}_p11"), format_real(r.p11));
    }
    line("location", belief.location().to_string());
    for (i, p) in belief.marginals().iter().enumerate() {
        line(&format!("marginal_{i}"), format_real(*p));
    }
    out
}

/// Parse the `key = value` instance format produced by [`write_instance`].
///
/// Blank lines and `#` comments are ignored.  Unknown keys, duplicate keys,
/// missing keys and malformed numbers are all reported with their line number.
pub fn parse_instance(text: &str) -> Result<(MonitoringModel, FactoredBelief)> {
    let mut entries: HashMap<String, (String, usize)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if entries.insert(key.clone(), (value, line_no)).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    fn take(entries: &mut HashMap<String, (String, usize)>, key: &str) -> Result<(String, usize)> {
        entries.remove(key).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing key `{key}`"),
        })
    }
    fn parse_num<T: FromStr>(raw: &(String, usize), key: &str) -> Result<T> {
        raw.0.parse().map_err(|_| Error::Parse {
            line: raw.1,
            message: format!("invalid number for `{key}`: `{}`", raw.0),
        })
    }
    fn take_usize(entries: &mut HashMap<String, (String, usize)>, key: &str) -> Result<usize> {
        let raw = take(entries, key)?;
        parse_num(&raw, key)
    }
    fn take_f64(entries: &mut HashMap<String, (String, usize)>, key: &str) -> Result<f64> {
        let raw = take(entries, key)?;
        parse_num(&raw, key)
    }

    let mut entries = entries;
    let width = take_usize(&mut entries, "width")?;
    let height = take_usize(&mut entries, "height")?;
    let q_minus = take_f64(&mut entries, "q_minus")?;
    let q_plus = take_f64(&mut entries, "q_plus")?;
    let gamma = take_f64(&mut entries, "gamma")?;
    let horizon = {
        let raw = take(&mut entries, "horizon")?;
        parse_num::<u32>(&raw, "horizon")?
    };
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    let cells = width * height;

    let mut sensed = Vec::with_capacity(cells);
    let mut unsensed = Vec::with_capacity(cells);
    for i in 0..cells {
        let w01 = take_f64(&mut entries, &format!("sensed_{i}_p01"))?;
        let w11 = take_f64(&mut entries, &format!("sensed_{i}_p11"))?;
        let r01 = take_f64(&mut entries, &format!("unsensed_{i}_p01"))?;
        let r11 = take_f64(&mut entries, &format!("unsensed_{i}_p11"))?;
        sensed.push(MarkovChainParams::new(w01, w11)?);
        unsensed.push(MarkovChainParams::new(r01, r11)?);
    }
    let location = take_usize(&mut entries, "location")?;
    let mut marginals = Vec::with_capacity(cells);
    for i in 0..cells {
        marginals.push(take_f64(&mut entries, &format!("marginal_{i}"))?);
    }

    if let Some((key, (_, line))) = entries.iter().min_by_key(|(_, (_, line))| *line) {
        return Err(Error::Parse {
            line: *line,
            message: format!("unknown key `{key}`"),
        });
    }

    let model = MonitoringModel::new(
        width, height, sensed, unsensed, q_minus, q_plus, gamma, horizon,
    )?;
    let belief = FactoredBelief::new(location, marginals)?;
    Ok((model, belief))
}

/// Uniform test fixture: `width`×`height` grid, sensed chains (0.1, 0.9),
/// identity unsensed chains, q = 0.05, gamma = 0.95.
#[cfg(test)]
pub(crate) fn test_model(width: usize, height: usize) -> MonitoringModel {
    let cells = width * height;
    MonitoringModel::new(
        width,
        height,
        vec![MarkovChainParams::new(0.1, 0.9).unwrap(); cells],
        vec![MarkovChainParams::identity(); cells],
        0.05,
        0.05,
        0.95,
        6,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_step_is_affine_with_the_right_endpoints() {
        let chain = MarkovChainParams::new(0.2, 0.8).unwrap();
        assert_eq!(chain.step(0.0), 0.2);
        assert_eq!(chain.step(1.0), 0.8);
        let mid = MarkovChainParams::new(0.1, 0.9).unwrap();
        assert!((mid.step(0.5) - 0.5).abs() < 1e-15);
        assert!(MarkovChainParams::identity().is_identity());
        assert_eq!(MarkovChainParams::identity().step(0.37), 0.37);
    }

    #[test]
    fn chain_rejects_out_of_range_probabilities() {
        assert!(matches!(
            MarkovChainParams::new(-0.1, 0.5),
            Err(Error::BadParameter { name: "p01", .. })
        ));
        assert!(matches!(
            MarkovChainParams::new(0.1, 1.5),
            Err(Error::BadParameter { name: "p11", .. })
        ));
    }

    #[test]
    fn action_sets_on_the_6x6_grid() {
        let model = test_model(6, 6);
        assert_eq!(model.actions(0), [0, 1, 6].into_iter().collect());
        assert_eq!(model.actions(7), [1, 6, 7, 8, 13].into_iter().collect());
        assert_eq!(model.actions(35), [29, 34, 35].into_iter().collect());
    }

    #[test]
    fn single_cell_grid_can_only_stay() {
        let model = test_model(1, 1);
        assert_eq!(model.actions(0), CellSet::singleton(0));
    }

    #[test]
    fn action_relation_is_symmetric() {
        for (w, h) in [(6, 6), (3, 2), (1, 4)] {
            let model = test_model(w, h);
            for x in 0..model.num_cells() {
                for a in model.actions(x).iter() {
                    assert!(
                        model.actions(a).contains(x),
                        "{x} -> {a} legal but not {a} -> {x} on {w}x{h}"
                    );
                }
            }
        }
    }

    #[test]
    fn internal_transition_moves_to_the_action_cell() {
        let model = test_model(6, 6);
        assert_eq!(model.internal_transition(7, 13).unwrap(), 13);
        assert_eq!(model.internal_transition(7, 7).unwrap(), 7);
        assert!(matches!(
            model.internal_transition(0, 7),
            Err(Error::IllegalMove { from: 0, action: 7 })
        ));
        assert!(matches!(
            model.internal_transition(99, 0),
            Err(Error::InvalidCell { cell: 99, .. })
        ));
    }

    #[test]
    fn observation_likelihood_table() {
        let model = test_model(6, 6);
        assert_eq!(model.observation_likelihood(0, 0), 0.95);
        assert_eq!(model.observation_likelihood(0, 1), 0.05);
        assert_eq!(model.observation_likelihood(1, 0), 0.05);
        assert_eq!(model.observation_likelihood(1, 1), 0.95);
        for y in 0..=1u8 {
            let total = model.observation_likelihood(0, y) + model.observation_likelihood(1, y);
            assert!((total - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn model_constructor_validation() {
        let chains = |n: usize| vec![MarkovChainParams::identity(); n];
        assert!(matches!(
            MonitoringModel::new(0, 3, vec![], vec![], 0.05, 0.05, 0.95, 6),
            Err(Error::InvalidDimensions { .. })
        ));
        assert!(matches!(
            MonitoringModel::new(9, 8, chains(72), chains(72), 0.05, 0.05, 0.95, 6),
            Err(Error::GridTooLarge { cells: 72, .. })
        ));
        assert!(matches!(
            MonitoringModel::new(2, 2, chains(3), chains(4), 0.05, 0.05, 0.95, 6),
            Err(Error::CountMismatch { expected: 4, got: 3, .. })
        ));
        assert!(matches!(
            MonitoringModel::new(2, 2, chains(4), chains(4), 0.6, 0.05, 0.95, 6),
            Err(Error::BadParameter { name: "q_minus", .. })
        ));
        assert!(matches!(
            MonitoringModel::new(2, 2, chains(4), chains(4), 0.05, 0.05, 1.5, 6),
            Err(Error::BadParameter { name: "gamma", .. })
        ));
        assert!(matches!(
            MonitoringModel::new(2, 2, chains(4), chains(4), 0.05, 0.05, 0.95, 0),
            Err(Error::BadParameter { name: "horizon", .. })
        ));
        // The uninformative endpoint q = 0.5 is allowed.
        assert!(MonitoringModel::new(2, 2, chains(4), chains(4), 0.5, 0.5, 0.95, 6).is_ok());
    }

    #[test]
    fn property2_detects_identity_unsensed_chains() {
        let (case1, _) = InstanceSampler::new(7, ExperimentCase::Case1).sample(0);
        assert!(case1.satisfies_property2());
        let (case2, _) =
            InstanceSampler::new(7, ExperimentCase::Case2(TargetRate::Medium)).sample(0);
        assert!(!case2.satisfies_property2());
    }

    #[test]
    fn mix_seed_is_deterministic_and_spreads() {
        assert_eq!(mix_seed(42, 7), mix_seed(42, 7));
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| mix_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(mix_seed(42, 7), mix_seed(43, 7));
    }

    #[test]
    fn sampling_is_reproducible_per_triple() {
        let a = InstanceSampler::new(99, ExperimentCase::Case1).sample(17);
        let b = InstanceSampler::new(99, ExperimentCase::Case1).sample(17);
        assert_eq!(a, b);
        let c = InstanceSampler::new(99, ExperimentCase::Case1).sample(18);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn case1_instances_have_slow_sensed_and_identity_unsensed_chains() {
        let sampler = InstanceSampler::new(5, ExperimentCase::Case1);
        for index in 0..20 {
            let (model, belief) = sampler.sample(index);
            assert_eq!(model.num_cells(), 36);
            assert!(model.satisfies_property2());
            assert!(belief.location() < 36);
            for chain in model.chains_sensed() {
                assert!((0.0..=0.2).contains(&chain.p01()));
                assert!((0.8..=1.0).contains(&chain.p11()));
            }
            for p in belief.marginals() {
                assert!((0.0..=1.0).contains(p));
            }
        }
    }

    #[test]
    fn case2_instances_reuse_the_sensed_chain_when_unsensed() {
        for (rate, r01, r11) in [
            (TargetRate::Slow, (0.0, 0.2), (0.8, 1.0)),
            (TargetRate::Medium, (0.2, 0.4), (0.6, 0.8)),
            (TargetRate::Fast, (0.4, 0.6), (0.4, 0.6)),
        ] {
            let sampler = InstanceSampler::new(5, ExperimentCase::Case2(rate));
            for index in 0..10 {
                let (model, _) = sampler.sample(index);
                assert_eq!(model.chains_sensed(), model.chains_unsensed());
                for chain in model.chains_sensed() {
                    assert!((r01.0..=r01.1).contains(&chain.p01()));
                    assert!((r11.0..=r11.1).contains(&chain.p11()));
                }
            }
        }
    }

    #[test]
    fn case_names_round_trip() {
        for case in [
            ExperimentCase::Case1,
            ExperimentCase::Case2(TargetRate::Slow),
            ExperimentCase::Case2(TargetRate::Medium),
            ExperimentCase::Case2(TargetRate::Fast),
        ] {
            assert_eq!(case.to_string().parse::<ExperimentCase>().unwrap(), case);
        }
        assert!("case3".parse::<ExperimentCase>().is_err());
    }

    #[test]
    fn format_real_uses_17_significant_digits() {
        assert_eq!(format_real(0.95), "9.4999999999999996e-1");
        assert_eq!(format_real(0.05), "5.0000000000000003e-2");
        for x in [0.0, 1.0, 0.1 + 0.2, 1.0 / 3.0, 1e-12] {
            assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn instance_serialization_round_trips_exactly() {
        for case in [
            ExperimentCase::Case1,
            ExperimentCase::Case2(TargetRate::Medium),
        ] {
            let (model, belief) = InstanceSampler::new(123, case).sample(4);
            let text = write_instance(&model, &belief);
            let (model2, belief2) = parse_instance(&text).unwrap();
            assert_eq!(model, model2);
            assert_eq!(belief, belief2);
        }
    }

    #[test]
    fn parser_ignores_comments_and_blank_lines() {
        let (model, belief) = InstanceSampler::new(1, ExperimentCase::Case1).sample(0);
        let text = format!(
            "# instance dump\n\n{}\nlocation = {} # overridden? no: comment only\n",
            write_instance(&model, &belief)
                .lines()
                .filter(|l| !l.starts_with("location"))
                .collect::<Vec<_>>()
                .join("\n"),
            belief.location()
        );
        let (model2, belief2) = parse_instance(&text).unwrap();
        assert_eq!(model, model2);
        assert_eq!(belief, belief2);
    }

    #[test]
    fn parser_reports_errors_with_line_numbers() {
        let (model, belief) = InstanceSampler::new(1, ExperimentCase::Case1).sample(0);
        let good = write_instance(&model, &belief);

        let unknown = format!("{good}mystery = 1\n");
        let n = unknown.lines().count();
        match parse_instance(&unknown) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, n);
                assert!(message.contains("unknown key `mystery`"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }

        let duplicate = format!("{good}width = 6\n");
        match parse_instance(&duplicate) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, duplicate.lines().count());
                assert!(message.contains("duplicate key `width`"), "{message}");
            }
            other => panic!("expected duplicate-key error, got {other:?}"),
        }

        let missing = good
            .lines()
            .filter(|l| !l.starts_with("gamma"))
            .collect::<Vec<_>>()
            .join("\n");
        match parse_instance(&missing) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("missing key `gamma`"), "{message}")
            }
            other => panic!("expected missing-key error, got {other:?}"),
        }

        let mangled = good.replace("gamma = 9", "gamma = nine9");
        match parse_instance(&mangled) {
            Err(Error::Parse { message, .. }) => {
                assert!(message.contains("invalid number for `gamma`"), "{message}")
            }
            other => panic!("expected number error, got {other:?}"),
        }

        let no_equals = format!("{good}just words\n");
        assert!(matches!(parse_instance(&no_equals), Err(Error::Parse { .. })));

        // Semantically invalid values surface the model's own validation.
        let bad_q = good.replace(
            &format!("q_minus = {}", format_real(0.05)),
            "q_minus = 0.7",
        );
        assert!(matches!(
            parse_instance(&bad_q),
            Err(Error::BadParameter { name: "q_minus", .. })
        ));
    }
}
