//! Cell sets, forward reachability, and the relaxed action sets.
//!
//! The agent's internal state is a cell on a small four-connected grid and an
//! action moves it to an adjacent cell (or keeps it in place), so the forward
//! reachability operator is
//!
//! ```text
//! F(S) = union over x in S of A(x),      F^k = F applied k times,
//! ```
//!
//! where `A(x)` is the action set of cell `x`.  Because staying put is always
//! legal, `F` is monotone: `S ⊆ F(S) ⊆ F(F(S)) ⊆ ...`.  Two relaxations of the
//! movement constraint are derived from it:
//!
//! * the *universal* action set: every cell may be sensed at every step;
//! * the *k-step* action set `Â_k(x) = union over i in F^k({x}) of A(i)`:
//!   every cell that could legally be sensed within the next `k` decisions.
//!
//! Sets are bitmasks over cell indices, which caps the grid at 64 cells; the
//! benchmark grids are far smaller.

use std::fmt;

use crate::model::MonitoringModel;

/// Maximum number of grid cells representable by [`CellSet`].
pub const MAX_CELLS: usize = 64;

/// A set of grid cells (equivalently: of actions), stored as a bitmask.
///
/// Iteration always yields cells in ascending index order, which is what makes
/// "smallest index wins" tie-breaking deterministic everywhere downstream.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CellSet(u64);

impl CellSet {
    /// The empty set.
    pub const EMPTY: CellSet = CellSet(0);

    /// Set containing exactly `cell`.
    pub fn singleton(cell: usize) -> Self {
        debug_assert!(cell < MAX_CELLS);
        CellSet(1 << cell)
    }

    /// Set containing every cell of an `n`-cell grid.
    pub fn all(n: usize) -> Self {
        debug_assert!(n <= MAX_CELLS);
        if n == MAX_CELLS {
            CellSet(u64::MAX)
        } else {
            CellSet((1u64 << n) - 1)
        }
    }

    pub fn insert(&mut self, cell: usize) {
        debug_assert!(cell < MAX_CELLS);
        self.0 |= 1 << cell;
    }

    pub fn contains(&self, cell: usize) -> bool {
        cell < MAX_CELLS && self.0 & (1 << cell) != 0
    }

    pub fn union(self, other: CellSet) -> CellSet {
        CellSet(self.0 | other.0)
    }

    pub fn is_subset_of(&self, other: &CellSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Raw bitmask; bit `i` set iff cell `i` is in the set.
    pub fn bits(&self) -> u64 {
        self.0
    }

    /// Iterate over members in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let cell = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(cell)
            }
        })
    }
}

impl FromIterator<usize> for CellSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = CellSet::EMPTY;
        for cell in iter {
            set.insert(cell);
        }
        set
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// One application of the reachability operator: `F(S) = ∪_{x∈S} A(x)`.
pub fn reachable_one_step(set: CellSet, model: &MonitoringModel) -> CellSet {
    let mut out = CellSet::EMPTY;
    for x in set.iter() {
        out = out.union(model.actions(x));
    }
    out
}

/// `k`-fold composition `F^k(S)`; `k = 0` is the identity.
pub fn reachable_k(set: CellSet, k: u32, model: &MonitoringModel) -> CellSet {
    let mut out = set;
    for _ in 0..k {
        let next = reachable_one_step(out, model);
        if next == out {
            break; // saturated; further applications are no-ops
        }
        out = next;
    }
    out
}

/// The universal relaxed action set: every cell of the grid.
pub fn relaxed_actions_universal(model: &MonitoringModel) -> CellSet {
    CellSet::all(model.num_cells())
}

/// The `k`-step relaxed action set `Â_k(x) = ∪_{i ∈ F^k({x})} A(i)`.
///
/// `k = 0` gives exactly `A(x)`; large `k` saturates to the universal set.
pub fn relaxed_actions_k(x: usize, k: u32, model: &MonitoringModel) -> CellSet {
    let reachable = reachable_k(CellSet::singleton(x), k, model);
    reachable_one_step(reachable, model)
}
