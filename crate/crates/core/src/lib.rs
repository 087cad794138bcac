//! Conservative multi-rectangular hybrid automata built from a monitoring
//! specification and recorded traces.

pub mod analysis;
pub mod automaton;
pub mod bench;
pub mod construct;
pub mod error;
pub mod geometry;
pub mod merge;
pub mod spec;
pub mod traces;

pub use automaton::{Edge, HybridAutomaton, ModeId};
pub use error::{Error, Result};
pub use geometry::{Interval, Rect};
