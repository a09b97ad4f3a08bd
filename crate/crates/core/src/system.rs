//! Ordered labelled transition systems.

use std::fmt::Debug;
use std::hash::Hash;

use crate::ordering::QuasiOrder;

/// A finitely branching labelled transition system with a decidable
/// quasi-ordering on its states and a fixed initial state.
pub trait Olts {
    type State: Clone + Eq + Hash + Debug;
    type Label: Clone + Eq + Debug;
    type Order: QuasiOrder<Self::State>;

    fn initial(&self) -> &Self::State;

    /// All enabled one-step successors, in a deterministic order.
    fn post(&self, x: &Self::State) -> Vec<(Self::Label, Self::State)>;

    /// Fires a single label, `None` when it is disabled in `x`.
    fn step(&self, x: &Self::State, label: &Self::Label) -> Option<Self::State>;

    fn order(&self) -> &Self::Order;

    fn show_state(&self, x: &Self::State) -> String;

    fn show_label(&self, label: &Self::Label) -> String;

    /// Fires `labels` in sequence. On failure returns the index of the first
    /// disabled label together with the state it was attempted from.
    fn replay(&self, x: &Self::State, labels: &[Self::Label]) -> Result<Self::State, (usize, Self::State)> {
        let mut cur = x.clone();
        for (i, l) in labels.iter().enumerate() {
            match self.step(&cur, l) {
                Some(next) => cur = next,
                None => return Err((i, cur)),
            }
        }
        Ok(cur)
    }
}
