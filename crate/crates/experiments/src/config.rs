//! Experiment configuration: a small `key = value` file, optionally
//! overridden from the command line, validated into a typed struct.
//!
//! ```text
//! case = case1
//! horizons = 2,3,4
//! num_instances = 1000
//! algorithms = exhaustive,rtbss-u,rtbss-k,greedy
//! seed = 42
//! output_path = results.csv
//! ```
//!
//! `pomcp_simulations` lists the simulation budgets to sweep and is required
//! exactly when `pomcp` appears in `algorithms`.  Unknown keys, duplicate
//! keys, and out-of-range values are rejected with the offending line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use miplan_core::ExperimentCase;

/// Planners the benchmark can run.  `RtbssU` and `RtbssK` are the
/// branch-and-bound search with the universal and k-step relaxation bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Exhaustive,
    RtbssU,
    RtbssK,
    Greedy,
    Pomcp,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::RtbssU => "rtbss-u",
            Algorithm::RtbssK => "rtbss-k",
            Algorithm::Greedy => "greedy",
            Algorithm::Pomcp => "pomcp",
        };
        f.write_str(name)
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "rtbss-u" => Ok(Algorithm::RtbssU),
            "rtbss-k" => Ok(Algorithm::RtbssK),
            "greedy" => Ok(Algorithm::Greedy),
            "pomcp" => Ok(Algorithm::Pomcp),
            other => bail!(
                "unknown algorithm `{other}`; expected exhaustive, rtbss-u, rtbss-k, greedy or pomcp"
            ),
        }
    }
}

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub case: ExperimentCase,
    pub horizons: Vec<u32>,
    pub num_instances: u64,
    pub algorithms: Vec<Algorithm>,
    /// Simulation budgets for the Monte Carlo baseline; empty unless `pomcp`
    /// is among the algorithms.
    pub pomcp_simulations: Vec<u32>,
    pub seed: u64,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    /// Load a config file and apply `overrides` (key, value) on top of it
    /// before validation.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut raw = parse_key_values(&text)
            .with_context(|| format!("parsing config file {}", path.display()))?;
        for (key, value) in overrides {
            raw.insert(key.clone(), (value.clone(), 0));
        }
        finalize(raw).with_context(|| format!("validating config {}", path.display()))
    }
}

/// The shared `key = value` surface syntax: `#` comments, blank lines,
/// duplicate keys rejected.  Values keep their source line for error reports.
fn parse_key_values(text: &str) -> Result<BTreeMap<String, (String, usize)>> {
    let mut map = BTreeMap::new();
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
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {line_no}: expected `key = value`, got `{line}`");
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), (value, line_no)).is_some() {
            bail!("line {line_no}: duplicate key `{key}`");
        }
    }
    Ok(map)
}

fn take(map: &mut BTreeMap<String, (String, usize)>, key: &str) -> Result<String> {
    map.remove(key)
        .map(|(value, _)| value)
        .with_context(|| format!("missing key `{key}`"))
}

fn parse_list<T: FromStr>(raw: &str, key: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let items: Vec<&str> = raw.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        bail!("`{key}` has an empty element in `{raw}`");
    }
    items
        .into_iter()
        .map(|s| {
            s.parse()
                .map_err(|e| anyhow::anyhow!("`{key}` element `{s}`: {e}"))
        })
        .collect()
}

fn finalize(mut map: BTreeMap<String, (String, usize)>) -> Result<ExperimentConfig> {
    let case: ExperimentCase = take(&mut map, "case")?
        .parse()
        .map_err(|e| anyhow::anyhow!("`case`: {e}"))?;

    let horizons: Vec<u32> = parse_list(&take(&mut map, "horizons")?, "horizons")?;
    if horizons.is_empty() {
        bail!("`horizons` must list at least one horizon");
    }
    for &h in &horizons {
        if !(1..=8).contains(&h) {
            bail!("horizon {h} is outside the supported range 1..=8");
        }
    }
    if has_duplicates(&horizons) {
        bail!("`horizons` lists the same horizon twice");
    }

    let num_instances: u64 = take(&mut map, "num_instances")?
        .parse()
        .context("`num_instances` must be a positive integer")?;
    if num_instances == 0 {
        bail!("`num_instances` must be at least 1");
    }

    let algorithms: Vec<Algorithm> = parse_list(&take(&mut map, "algorithms")?, "algorithms")?;
    if algorithms.is_empty() {
        bail!("`algorithms` must list at least one algorithm");
    }
    if has_duplicates(&algorithms) {
        bail!("`algorithms` lists the same algorithm twice");
    }

    let wants_pomcp = algorithms.contains(&Algorithm::Pomcp);
    let pomcp_simulations: Vec<u32> = match map.remove("pomcp_simulations") {
        Some((raw, _)) => {
            if !wants_pomcp {
                bail!("`pomcp_simulations` is set but `pomcp` is not among the algorithms");
            }
            let sims: Vec<u32> = parse_list(&raw, "pomcp_simulations")?;
            if sims.is_empty() || sims.contains(&0) {
                bail!("`pomcp_simulations` must list positive budgets");
            }
            if has_duplicates(&sims) {
                bail!("`pomcp_simulations` lists the same budget twice");
            }
            sims
        }
        None => {
            if wants_pomcp {
                bail!("`pomcp` is requested but `pomcp_simulations` is not set");
            }
            Vec::new()
        }
    };

    let seed: u64 = take(&mut map, "seed")?
        .parse()
        .context("`seed` must be an unsigned integer")?;
    let output_path = PathBuf::from(take(&mut map, "output_path")?);

    if let Some((key, (_, line))) = map.into_iter().next() {
        if line > 0 {
            bail!("line {line}: unknown key `{key}`");
        }
        bail!("unknown key `{key}`");
    }

    Ok(ExperimentConfig {
        case,
        horizons,
        num_instances,
        algorithms,
        pomcp_simulations,
        seed,
        output_path,
    })
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, x)| items[..i].contains(x))
}
