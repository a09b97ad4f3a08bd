//! Analyses for branch-well-structured transition systems: reduced
//! reachability trees, counter and FIFO machines, input-bounded products and
//! coverability for (cover-)monotone counter machines.

pub mod corpus;
pub mod counter;
pub mod cover;
pub mod error;
pub mod fifo;
pub mod model;
pub mod omega;
pub mod ordering;
pub mod rrt;
pub mod system;
pub mod verdict;

pub use counter::{CounterConfig, CounterMachine, CounterOp, CounterSystem, CounterTransition, TransitionId};
pub use error::{Error, Result};
pub use fifo::{Action, BoundedLang, Direction, FifoConfig, FifoMachine, FifoSystem, FifoTransition};
pub use model::{parse_model, print_model, ModelError, ModelFile, ModelKind};
pub use ordering::{Alphabet, NatVec, QuasiOrder, Symbol, Word};
pub use rrt::{Rrt, RrtNode};
pub use system::Olts;
pub use verdict::{AnalysisVerdict, Outcome};
