//! Benchmark harness for the planners in `miplan-core`: experiment
//! configuration, deterministic instance sweeps, per-search metrics rows, and
//! grouped summaries.  The `miplan` binary is a thin CLI over these modules.

pub mod config;
pub mod metrics;
pub mod runner;
pub mod summary;
