//! Per-decision measurement records and their CSV serialization.
//!
//! One [`MetricsRow`] is produced per (instance, horizon, algorithm) cell.
//! The column set is fixed: analysis scripts and the summarizer key on the
//! header below, so changing it is a breaking change to the output schema.
//! Reals are written with 17 significant digits so that re-reading a file
//! reproduces the original `f64` values bit for bit.

use std::path::Path;

use anyhow::{bail, Context, Result};
use miplan_core::format_real;

/// The exact header line every results file starts with.
pub const HEADER: [&str; 10] = [
    "instance_index",
    "horizon",
    "algorithm",
    "best_action",
    "value",
    "nodes_expanded",
    "bound_evaluations",
    "elapsed_ms",
    "agrees_with_optimal",
    "performance_loss",
];

/// One benchmark measurement: what a planner recommended at the root of one
/// instance, what it cost, and how it compares to the exhaustive optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub instance_index: u64,
    pub horizon: u32,
    /// Planner name as reported in the CSV; POMCP rows carry their budget,
    /// e.g. `pomcp-1000`.
    pub algorithm: String,
    pub best_action: usize,
    /// The value the planner itself reported for its recommendation (for
    /// Monte Carlo rows, the exact Q-value of the recommended action).
    pub value: f64,
    pub nodes_expanded: u64,
    pub bound_evaluations: u64,
    pub elapsed_ms: f64,
    pub agrees_with_optimal: bool,
    /// Exhaustive optimum minus the exact Q-value of the recommendation;
    /// exactly `0.0` whenever `agrees_with_optimal` holds.
    pub performance_loss: f64,
}

impl MetricsRow {
    fn to_record(&self) -> [String; 10] {
        debug_assert!(!self.agrees_with_optimal || self.performance_loss == 0.0);
        [
            self.instance_index.to_string(),
            self.horizon.to_string(),
            self.algorithm.clone(),
            self.best_action.to_string(),
            format_real(self.value),
            self.nodes_expanded.to_string(),
            self.bound_evaluations.to_string(),
            format_real(self.elapsed_ms),
            bool_str(self.agrees_with_optimal).to_string(),
            format_real(self.performance_loss),
        ]
    }

    /// Ordering used for output files: instance, then horizon, then
    /// algorithm name, so reruns and parallel runs produce identical files.
    pub fn sort_key(&self) -> (u64, u32, &str) {
        (self.instance_index, self.horizon, &self.algorithm)
    }
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// Write `rows` to `path`, header first, `\n` line endings.
pub fn write_rows(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("creating results file {}", path.display()))?;
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record(row.to_record())?;
    }
    writer
        .flush()
        .with_context(|| format!("writing results file {}", path.display()))
}

/// Read a results file produced by [`write_rows`], validating the header and
/// reporting the file line of the first malformed record.
pub fn read_rows(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening results file {}", path.display()))?;
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        bail!(
            "{}: unexpected header `{}`; this does not look like a results file",
            path.display(),
            header.iter().collect::<Vec<_>>().join(",")
        );
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(
            parse_record(&record)
                .with_context(|| format!("{}: line {line}", path.display()))?,
        );
    }
    Ok(rows)
}

fn parse_record(record: &csv::StringRecord) -> Result<MetricsRow> {
    if record.len() != HEADER.len() {
        bail!("expected {} fields, found {}", HEADER.len(), record.len());
    }
    let field = |i: usize| record.get(i).unwrap();
    let numeric = |i: usize| -> Result<f64> {
        field(i)
            .parse()
            .with_context(|| format!("bad real in column `{}`: `{}`", HEADER[i], field(i)))
    };
    Ok(MetricsRow {
        instance_index: field(0)
            .parse()
            .with_context(|| format!("bad instance index `{}`", field(0)))?,
        horizon: field(1)
            .parse()
            .with_context(|| format!("bad horizon `{}`", field(1)))?,
        algorithm: field(2).to_string(),
        best_action: field(3)
            .parse()
            .with_context(|| format!("bad action `{}`", field(3)))?,
        value: numeric(4)?,
        nodes_expanded: field(5)
            .parse()
            .with_context(|| format!("bad node count `{}`", field(5)))?,
        bound_evaluations: field(6)
            .parse()
            .with_context(|| format!("bad bound count `{}`", field(6)))?,
        elapsed_ms: numeric(7)?,
        agrees_with_optimal: parse_bool(field(8))
            .with_context(|| format!("bad boolean `{}` in `agrees_with_optimal`", field(8)))?,
        performance_loss: numeric(9)?,
    })
}
