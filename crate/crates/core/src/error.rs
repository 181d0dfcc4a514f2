//! Error type shared across the library.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid dimensions {width}x{height} are invalid; both sides must be at least 1")]
    InvalidDimensions { width: usize, height: usize },

    #[error("grid has {cells} cells, more than the {max} supported by the bitmask cell sets")]
    GridTooLarge { cells: usize, max: usize },

    #[error("{name} = {value} is outside {expected}")]
    BadParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("expected {expected} {what}, got {got}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("cell index {cell} is out of range for a grid with {cells} cells")]
    InvalidCell { cell: usize, cells: usize },

    #[error("action {action} is not available from cell {from}; legal actions are the cell itself and its grid neighbours")]
    IllegalMove { from: usize, action: usize },

    #[error("observation z={observation} has zero probability after sensing cell {action}")]
    ZeroProbabilityObservation { action: usize, observation: u8 },

    #[error("joint distribution sums to {sum:e}, expected 1 within 1e-9")]
    UnnormalizedJoint { sum: f64 },

    #[error("action set is empty")]
    EmptyActionSet,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
