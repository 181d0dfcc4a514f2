//! Aggregation of results files into the per-group tables the benchmark
//! write-ups are built from: agreement percentages, mean/max performance
//! loss, node counts, and runtimes, grouped by any of algorithm, horizon,
//! and instance.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use miplan_core::format_real;

use crate::metrics::MetricsRow;

/// A column rows can be grouped by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupField {
    Algorithm,
    Horizon,
    Instance,
}

impl fmt::Display for GroupField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupField::Algorithm => "algorithm",
            GroupField::Horizon => "horizon",
            GroupField::Instance => "instance",
        })
    }
}

impl FromStr for GroupField {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algorithm" => Ok(GroupField::Algorithm),
            "horizon" => Ok(GroupField::Horizon),
            "instance" => Ok(GroupField::Instance),
            other => bail!("unknown group field `{other}`; expected algorithm, horizon or instance"),
        }
    }
}

/// Parse a comma-separated `--group-by` list.
pub fn parse_group_by(text: &str) -> Result<Vec<GroupField>> {
    let mut fields = Vec::new();
    for part in text.split(',') {
        let field: GroupField = part.trim().parse()?;
        if fields.contains(&field) {
            bail!("group field `{field}` given twice");
        }
        fields.push(field);
    }
    Ok(fields)
}

/// Aggregates for one group of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Rendered group-key values, parallel to the field list passed to
    /// [`summarize`].
    pub group: Vec<String>,
    pub count: u64,
    pub mean_performance_loss: f64,
    pub max_performance_loss: f64,
    /// Percentage (0–100) of rows whose recommendation matched the optimum.
    pub agreement_pct: f64,
    pub mean_nodes_expanded: f64,
    pub mean_elapsed_ms: f64,
}

/// Group-key component that sorts numerically for numeric columns and
/// lexically for names, so horizons come out as 2,3,…,10 and not "10" < "2".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum KeyPart {
    Num(u64),
    Text(String),
}

impl KeyPart {
    fn render(&self) -> String {
        match self {
            KeyPart::Num(n) => n.to_string(),
            KeyPart::Text(s) => s.clone(),
        }
    }
}

#[derive(Default)]
struct Accumulator {
    count: u64,
    agree: u64,
    loss_sum: f64,
    loss_max: f64,
    nodes_sum: f64,
    elapsed_sum: f64,
}

/// Aggregate `rows` into one [`SummaryRow`] per distinct group key.
pub fn summarize(rows: &[MetricsRow], fields: &[GroupField]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<Vec<KeyPart>, Accumulator> = BTreeMap::new();
    for row in rows {
        let key: Vec<KeyPart> = fields
            .iter()
            .map(|field| match field {
                GroupField::Algorithm => KeyPart::Text(row.algorithm.clone()),
                GroupField::Horizon => KeyPart::Num(u64::from(row.horizon)),
                GroupField::Instance => KeyPart::Num(row.instance_index),
            })
            .collect();
        let acc = groups.entry(key).or_default();
        acc.count += 1;
        acc.agree += u64::from(row.agrees_with_optimal);
        acc.loss_sum += row.performance_loss;
        acc.loss_max = acc.loss_max.max(row.performance_loss);
        acc.nodes_sum += row.nodes_expanded as f64;
        acc.elapsed_sum += row.elapsed_ms;
    }

    groups
        .into_iter()
        .map(|(key, acc)| {
            let n = acc.count as f64;
            SummaryRow {
                group: key.iter().map(KeyPart::render).collect(),
                count: acc.count,
                mean_performance_loss: acc.loss_sum / n,
                max_performance_loss: acc.loss_max,
                agreement_pct: 100.0 * acc.agree as f64 / n,
                mean_nodes_expanded: acc.nodes_sum / n,
                mean_elapsed_ms: acc.elapsed_sum / n,
            }
        })
        .collect()
}

/// Render a summary as CSV text (group columns first, then the aggregates).
pub fn render(fields: &[GroupField], summaries: &[SummaryRow]) -> String {
    let mut out = String::new();
    for field in fields {
        out.push_str(&field.to_string());
        out.push(',');
    }
    out.push_str(
        "count,mean_performance_loss,max_performance_loss,agreement_pct,\
         mean_nodes_expanded,mean_elapsed_ms\n",
    );
    for row in summaries {
        debug_assert_eq!(row.group.len(), fields.len());
        for part in &row.group {
            out.push_str(part);
            out.push(',');
        }
        out.push_str(&row.count.to_string());
        for real in [
            row.mean_performance_loss,
            row.max_performance_loss,
            row.agreement_pct,
            row.mean_nodes_expanded,
            row.mean_elapsed_ms,
        ] {
            out.push(',');
            out.push_str(&format_real(real));
        }
        out.push('\n');
    }
    out
}
