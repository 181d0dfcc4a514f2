//! `miplan` — benchmark CLI for the target-monitoring planners.
//!
//! Three subcommands: `run` executes a configured sweep and writes a results
//! CSV, `summarize` aggregates such a CSV into per-group tables, and
//! `sample` prints one benchmark instance for inspection.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use miplan_core::{write_instance, ExperimentCase, InstanceSampler};
use miplan_experiments::config::ExperimentConfig;
use miplan_experiments::metrics::read_rows;
use miplan_experiments::{runner, summary};

#[derive(Parser)]
#[command(name = "miplan", version, about = "Benchmark planners on the target-monitoring domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file and write a results CSV.
    Run(RunArgs),
    /// Aggregate a results CSV into per-group means, maxima and agreement.
    Summarize(SummarizeArgs),
    /// Print one sampled instance in the model's key-value format.
    Sample(SampleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment description (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; defaults to one per CPU.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the config's `case`.
    #[arg(long)]
    case: Option<String>,
    /// Override the config's `horizons` (comma-separated).
    #[arg(long)]
    horizons: Option<String>,
    /// Override the config's `num_instances`.
    #[arg(long)]
    num_instances: Option<String>,
    /// Override the config's `algorithms` (comma-separated).
    #[arg(long)]
    algorithms: Option<String>,
    /// Override the config's `pomcp_simulations` (comma-separated).
    #[arg(long)]
    pomcp_simulations: Option<String>,
    /// Override the config's `seed`.
    #[arg(long)]
    seed: Option<String>,
    /// Override the config's `output_path`.
    #[arg(long)]
    output_path: Option<String>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Results CSV produced by `run`.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated group columns: algorithm, horizon, instance.
    #[arg(long, default_value = "algorithm,horizon")]
    group_by: String,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Instance family: case1, case2-slow, case2-medium or case2-fast.
    #[arg(long)]
    case: String,
    /// Instance index within the family.
    #[arg(long)]
    index: u64,
    /// Sampler seed (the benchmark default is 0).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Summarize(args) => summarize(args),
        Command::Sample(args) => sample(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut overrides = Vec::new();
    for (key, value) in [
        ("case", &args.case),
        ("horizons", &args.horizons),
        ("num_instances", &args.num_instances),
        ("algorithms", &args.algorithms),
        ("pomcp_simulations", &args.pomcp_simulations),
        ("seed", &args.seed),
        ("output_path", &args.output_path),
    ] {
        if let Some(value) = value {
            overrides.push((key.to_string(), value.clone()));
        }
    }
    let config = ExperimentConfig::load(&args.config, &overrides)?;
    let rows = runner::run(&config, args.jobs)?;
    println!("wrote {} rows to {}", rows.len(), config.output_path.display());
    Ok(())
}

fn summarize(args: SummarizeArgs) -> Result<()> {
    let rows = read_rows(&args.input)?;
    let fields = summary::parse_group_by(&args.group_by)?;
    let text = summary::render(&fields, &summary::summarize(&rows, &fields));
    match args.output {
        Some(path) => std::fs::write(&path, text)
            .with_context(|| format!("writing summary to {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let case: ExperimentCase = args.case.parse()?;
    let (model, belief) = InstanceSampler::new(args.seed, case).sample(args.index);
    print!("{}", write_instance(&model, &belief));
    Ok(())
}
