//! The benchmark driver: sample instances, run the requested planners, and
//! collect one [`MetricsRow`] per (instance, horizon, algorithm) cell.
//!
//! The exhaustive search is always executed per cell — it is the reference
//! every other planner's recommendation is judged against, whether or not an
//! `exhaustive` row was requested.  Cells are independent, so they run on a
//! rayon pool; rows are sorted before writing to keep the output file
//! independent of scheduling.

use std::time::Instant;

use anyhow::{Context, Result};
use miplan_core::{
    exhaustive, greedy_action, greedy_value_constrained, mix_seed, q_value, recommend, rtbss,
    BoundKind, FactoredBelief, InstanceSampler, MctsParams, MonitoringModel, SearchResult,
};
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig};
use crate::metrics::{write_rows, MetricsRow};

/// Salt mixed into POMCP seeds so the Monte Carlo stream is decoupled from
/// the instance-sampling stream (the bytes spell "POMC").
const POMCP_SEED_SALT: u64 = 0x504F_4D43;

/// Run every cell of `config` and write the results to
/// `config.output_path`.  Returns the written rows in file order.
///
/// `jobs` limits the worker-pool size; `None` uses one worker per CPU.
pub fn run(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<MetricsRow>> {
    // Fail on an unwritable destination before burning CPU on the sweep.
    std::fs::File::create(&config.output_path).with_context(|| {
        format!(
            "output file {} is not writable",
            config.output_path.display()
        )
    })?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building the worker pool")?;

    let cells: Vec<(u64, u32)> = (0..config.num_instances)
        .flat_map(|instance| config.horizons.iter().map(move |&h| (instance, h)))
        .collect();

    let mut rows: Vec<MetricsRow> = pool.install(|| {
        cells
            .par_iter()
            .flat_map_iter(|&(instance, horizon)| run_cell(config, instance, horizon))
            .collect()
    });
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    write_rows(&config.output_path, &rows)?;
    Ok(rows)
}

/// Exhaustive optimum minus the exact Q-value of `recommended` at the root;
/// zero exactly when `recommended` is the tie-broken optimal action.
pub fn performance_loss(
    belief: &FactoredBelief,
    h: u32,
    recommended: usize,
    model: &MonitoringModel,
) -> miplan_core::Result<f64> {
    let q = q_value(belief, recommended, h, model)?;
    Ok(exhaustive(belief, h, model).value - q)
}

fn run_cell(config: &ExperimentConfig, instance: u64, horizon: u32) -> Vec<MetricsRow> {
    let sampler = InstanceSampler::new(config.seed, config.case);
    let (model, belief) = sampler.sample(instance);
    let reference = exhaustive(&belief, horizon, &model);

    let row = |algorithm: String, result: CellOutcome| -> MetricsRow {
        let q_of = |a: usize| {
            reference
                .q_values
                .iter()
                .find(|entry| entry.action == a)
                .expect("recommended action is a legal root action")
                .value
        };
        let agrees = result.best_action == reference.best_action;
        MetricsRow {
            instance_index: instance,
            horizon,
            algorithm,
            best_action: result.best_action,
            value: result.value,
            nodes_expanded: result.nodes_expanded,
            bound_evaluations: result.bound_evaluations,
            elapsed_ms: result.elapsed_ms,
            agrees_with_optimal: agrees,
            // The max over root Q-values IS the optimum, so an agreeing row
            // subtracts the identical float and lands on exactly 0.0.
            performance_loss: reference.value - q_of(result.best_action),
        }
    };

    let mut rows = Vec::new();
    for &algorithm in &config.algorithms {
        match algorithm {
            Algorithm::Exhaustive => {
                rows.push(row("exhaustive".into(), CellOutcome::of_search(&reference)));
            }
            Algorithm::RtbssU => {
                let result = rtbss(&belief, horizon, BoundKind::Universal, &model);
                rows.push(row("rtbss-u".into(), CellOutcome::of_search(&result)));
            }
            Algorithm::RtbssK => {
                let result = rtbss(&belief, horizon, BoundKind::KStep, &model);
                rows.push(row("rtbss-k".into(), CellOutcome::of_search(&result)));
            }
            Algorithm::Greedy => {
                let start = Instant::now();
                let action = greedy_action(&belief, model.actions(belief.location()), &model)
                    .expect("grid action sets are never empty");
                let value = greedy_value_constrained(&belief, horizon, &model);
                rows.push(row(
                    "greedy".into(),
                    CellOutcome {
                        best_action: action,
                        value,
                        nodes_expanded: 0,
                        bound_evaluations: 1,
                        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                    },
                ));
            }
            Algorithm::Pomcp => {
                for &simulations in &config.pomcp_simulations {
                    let params = MctsParams::new(
                        simulations,
                        pomcp_seed(config.seed, instance, horizon, simulations),
                    );
                    let start = Instant::now();
                    let action = recommend(&belief, horizon, &params, &model);
                    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
                    let exact_q = reference
                        .q_values
                        .iter()
                        .find(|entry| entry.action == action)
                        .expect("recommendation is a legal root action")
                        .value;
                    rows.push(row(
                        format!("pomcp-{simulations}"),
                        CellOutcome {
                            best_action: action,
                            value: exact_q,
                            nodes_expanded: 0,
                            bound_evaluations: 0,
                            elapsed_ms,
                        },
                    ));
                }
            }
        }
    }
    rows
}

/// What one planner produced on one cell, normalized for [`MetricsRow`].
struct CellOutcome {
    best_action: usize,
    value: f64,
    nodes_expanded: u64,
    bound_evaluations: u64,
    elapsed_ms: f64,
}

impl CellOutcome {
    fn of_search(result: &SearchResult) -> Self {
        CellOutcome {
            best_action: result.best_action,
            value: result.value,
            nodes_expanded: result.stats.nodes_expanded,
            bound_evaluations: result.stats.bound_evaluations,
            elapsed_ms: result.stats.elapsed.as_secs_f64() * 1e3,
        }
    }
}

/// Independent deterministic seed per (run seed, instance, horizon, budget).
fn pomcp_seed(seed: u64, instance: u64, horizon: u32, simulations: u32) -> u64 {
    let cell = (u64::from(horizon) << 32) | u64::from(simulations);
    mix_seed(mix_seed(mix_seed(seed, POMCP_SEED_SALT), instance), cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::read_rows;
    use miplan_core::ExperimentCase;
    use std::path::{Path, PathBuf};

    fn config_in(dir: &Path, text: &str) -> ExperimentConfig {
        let overrides = [(
            "output_path".to_string(),
            dir.join("rows.csv").to_string_lossy().into_owned(),
        )];
        let path = dir.join("config.cfg");
        std::fs::write(&path, text).unwrap();
        ExperimentConfig::load(&path, &overrides).unwrap()
    }

    const SMALL: &str = "\
case = case1
horizons = 2
num_instances = 1
algorithms = exhaustive,greedy
seed = 5
output_path = placeholder.csv
";

    #[test]
    fn one_cell_yields_one_row_per_algorithm() {
        let dir = tempfile::tempdir().unwrap();
        let config = config_in(dir.path(), SMALL);
        let rows = run(&config, Some(1)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].algorithm, "exhaustive");
        assert_eq!(rows[1].algorithm, "greedy");

        let text = std::fs::read_to_string(&config.output_path).unwrap();
        assert_eq!(text.lines().count(), 3); // header + 2 data rows
        assert_eq!(read_rows(&config.output_path).unwrap(), rows);
    }

    #[test]
    fn reruns_are_identical_apart_from_timing() {
        let dir = tempfile::tempdir().unwrap();
        let text = SMALL
            .replace("num_instances = 1", "num_instances = 3")
            .replace(
                "algorithms = exhaustive,greedy",
                "algorithms = exhaustive,rtbss-k,greedy,pomcp\npomcp_simulations = 25",
            );
        let config = config_in(dir.path(), &text);
        let first = run(&config, Some(1)).unwrap();
        let second = run(&config, None).unwrap();
        assert_eq!(first.len(), second.len());
        for (a, b) in first.iter().zip(&second) {
            let mut b = b.clone();
            b.elapsed_ms = a.elapsed_ms;
            assert_eq!(*a, b, "rows differ beyond timing");
        }
    }

    #[test]
    fn rows_come_out_sorted_by_instance_horizon_algorithm() {
        let dir = tempfile::tempdir().unwrap();
        let text = SMALL
            .replace("horizons = 2", "horizons = 3,2")
            .replace("num_instances = 1", "num_instances = 2");
        let config = config_in(dir.path(), &text);
        let rows = run(&config, None).unwrap();
        assert_eq!(rows.len(), 8);
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.instance_index, r.horizon, r.algorithm.clone()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(rows[0].horizon, 2, "horizons reordered ascending per instance");
    }

    #[test]
    fn agreement_and_loss_are_consistent_on_drifting_targets() {
        // Case-2 instances are where planners actually disagree; make sure
        // the bookkeeping columns stay coherent when they do.
        let dir = tempfile::tempdir().unwrap();
        let text = SMALL
            .replace("case = case1", "case = case2-fast")
            .replace("num_instances = 1", "num_instances = 12")
            .replace(
                "algorithms = exhaustive,greedy",
                "algorithms = exhaustive,rtbss-u,greedy,pomcp\npomcp_simulations = 10",
            );
        let config = config_in(dir.path(), &text);
        let rows = run(&config, None).unwrap();
        let mut disagreements = 0;
        for row in &rows {
            assert!(row.performance_loss >= 0.0, "{row:?}");
            if row.agrees_with_optimal {
                assert_eq!(row.performance_loss, 0.0, "{row:?}");
            } else {
                disagreements += 1;
                assert!(row.performance_loss > 0.0, "{row:?}");
            }
            if row.algorithm == "exhaustive" {
                assert!(row.agrees_with_optimal);
            }
        }
        assert!(disagreements > 0, "expected the cheap planners to slip somewhere");
    }

    #[test]
    fn unwritable_output_fails_before_any_search() {
        let config = ExperimentConfig {
            case: ExperimentCase::Case1,
            horizons: vec![6],
            num_instances: 1_000_000, // would take forever if it ever ran
            algorithms: vec![Algorithm::Exhaustive],
            pomcp_simulations: Vec::new(),
            seed: 1,
            output_path: PathBuf::from("/nonexistent-dir/rows.csv"),
        };
        let start = Instant::now();
        let err = run(&config, None).unwrap_err();
        assert!(format!("{err:#}").contains("not writable"), "{err:#}");
        assert!(start.elapsed().as_secs() < 5);
    }

    #[test]
    fn loss_of_the_optimal_action_is_zero_and_of_a_worse_action_positive() {
        let sampler = InstanceSampler::new(33, ExperimentCase::Case1);
        let (model, belief) = sampler.sample(0);
        let reference = exhaustive(&belief, 2, &model);
        assert_eq!(
            performance_loss(&belief, 2, reference.best_action, &model).unwrap(),
            0.0
        );
        let mut worst = 0.0_f64;
        for entry in &reference.q_values {
            let loss = performance_loss(&belief, 2, entry.action, &model).unwrap();
            assert!((loss - (reference.value - entry.value)).abs() < 1e-12);
            assert!(loss >= 0.0);
            assert!(loss <= 2.0, "loss bounded by one bit per decision");
            worst = worst.max(loss);
        }
        assert!(worst > 0.0, "every action optimal looks like a degenerate instance");
    }
}
